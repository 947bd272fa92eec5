#ifndef QSTAR_ERRORS_HPP
#define QSTAR_ERRORS_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qstar {

/// Base class of everything thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Requested dimension outside the supported range.
class SizeError : public Error {
public:
  using Error::Error;
};

/// Operands belong to different algebras or carry wrong lengths.
class DimensionMismatch : public Error {
public:
  using Error::Error;
};

/// A product or adjoint left the span of the basis beyond tolerance.
class ClosureError : public Error {
public:
  using Error::Error;
};

/// A matrix that must be Hermitian positive semidefinite is not.
class PositivityError : public Error {
public:
  using Error::Error;
};

/// Functional fails the representability conditions.
class RepresentabilityError : public Error {
public:
  using Error::Error;
};

/// Generator b with omega(b*b) below the rank tolerance.
class DegenerateGeneratorError : public Error {
public:
  DegenerateGeneratorError(const std::string& what, double norm_squared)
      : Error(what), norm_squared(norm_squared) {}
  double norm_squared;
};

/// State has a singular density matrix where an invertible one is required.
class SingularStateError : public Error {
public:
  using Error::Error;
};

/// Operation only defined on full matrix algebras.
class UnsupportedStructureError : public Error {
public:
  using Error::Error;
};

/// Supplied subset does not generate the target algebra.
class NotGeneratingError : public Error {
public:
  using Error::Error;
};

/// A residual that must vanish for valid inputs did not; indicates a bug
/// or numerically broken input rather than a legal outcome.
class NumericalFailureError : public Error {
public:
  using Error::Error;
};

/// An induced map failed its well-definedness certificate. Carries the
/// kernel element whose image refuses to vanish.
class NotWellDefinedError : public Error {
public:
  NotWellDefinedError(const std::string& what, double certificate,
                      std::vector<std::complex<double>> witness = {})
      : Error(what), certificate(certificate), witness(std::move(witness)) {}
  double certificate;
  std::vector<std::complex<double>> witness;  // coefficients of the kernel element
};

/// A map presented as a derivation violates the Leibniz structure.
class DerivationInconsistencyError : public Error {
public:
  using Error::Error;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace qstar

#endif
