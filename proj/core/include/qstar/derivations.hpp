#ifndef QSTAR_DERIVATIONS_HPP
#define QSTAR_DERIVATIONS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "qstar/modifications.hpp"

namespace qstar {

/// A linear map on algebra coefficients, delta(a) = map * coeffs(a), with
/// the *-derivation axioms verified on the basis.
struct Derivation {
  Matrix map;  // d x d
  bool verified_star = false;
  bool verified_leibniz = false;
};

/// delta(a) = i [h, a] for Hermitian h; always passes both checks.
Derivation innerDerivation(const StarAlgebra& a, const AlgebraElement& h);

struct DerivationCheck {
  Derivation derivation;
  bool star_ok = false;
  bool leibniz_ok = false;
  double worst_star = 0.0;
  double worst_leibniz = 0.0;
  int witness_i = -1;  // basis pair of the worst Leibniz violation
  int witness_j = -1;
};

/// Exhaustive basis-pair validation of axioms (i) and (iii); linearity is
/// structural. Violations are reported, never thrown.
DerivationCheck checkDerivation(const StarAlgebra& a, const Matrix& map);

AlgebraElement applyDerivation(const StarAlgebra& a, const Derivation& delta,
                               const AlgebraElement& x);

/// The induced map delta_pi(pi(a)) = pi(delta(a)), defined only when
/// pi(a) = 0 forces pi(delta(a)) = 0. The certificate is the maximum of
/// ||pi(delta(a))|| over an orthonormal basis of ker(pi).
struct InducedDerivation {
  std::vector<Matrix> delta_rep;  // pi(delta(B_i))
  double certificate = 0.0;
  int kernel_dim = 0;
  bool well_defined = false;
  Vector witness;  // kernel element with the largest image, when not well defined
};

InducedDerivation inducedDerivation(const StarAlgebra& a, const GnsTriple& g,
                                    const Derivation& delta);

/// Effective Hamiltonian implementing the induced derivation:
/// pi(delta(x)) = i(H pi(x) - pi(x) H) in least squares over Hermitian H,
/// minimal Frobenius norm, then a scalar shift enforcing <H xi, xi> = 0.
struct EffectiveHamiltonian {
  Matrix matrix;
  double residual = 0.0;           // max over basis, Frobenius
  bool spatial = false;
  double scalar_shift = 0.0;       // multiple of I removed by the gauge
  double cyclic_image_norm = 0.0;  // ||H xi||
  bool conditioning_warning = false;
  double condition = 0.0;
};

EffectiveHamiltonian solveSpatial(const StarAlgebra& a, const GnsTriple& g,
                                  const Derivation& delta, double threshold = 1e-8);

/// Constants of the two derivation bounds: kappa from the seminorm
/// domination, a sampled lower bound for the best C, and the certified
/// upper bound ||H xi|| when the derivation is spatial.
struct BoundReport {
  double kappa = 0.0;
  double c_lower = 0.0;
  double c_upper = 0.0;
  bool has_upper = false;
  int samples = 0;
};

BoundReport estimateBoundConstant(const StarAlgebra& a, const PositiveFunctional& omega,
                                  const Derivation& delta, int restarts = 8,
                                  std::uint64_t seed = 0x5eedULL);

/// Checks |omega_b(delta(a))| <= (C ||pi(b)|| + ||lambda(delta(b))||) *
/// (omega_b(a*a)^{1/2} + omega_b(aa*)^{1/2}) on sampled a, and the algebraic
/// identity b* delta(a) b = delta(b*ab) - delta(b*) a b - b* a delta(b).
struct ModifiedBoundReport {
  int samples = 0;
  int violations = 0;
  double worst_slack = 0.0;        // most negative margin seen
  double identity_residual = 0.0;  // worst deviation of the proof identity
  double constant = 0.0;           // C ||pi(b)|| + ||lambda(delta(b))||
};

ModifiedBoundReport verifyModifiedBound(const StarAlgebra& a, const PositiveFunctional& omega,
                                        const AlgebraElement& b, const Derivation& delta,
                                        int samples = 200, std::uint64_t seed = 0x5eedULL);
/// Variant reusing an already computed bound report for omega.
ModifiedBoundReport verifyModifiedBound(const StarAlgebra& a, const PositiveFunctional& omega,
                                        const AlgebraElement& b, const Derivation& delta,
                                        const BoundReport& bound, int samples = 200,
                                        std::uint64_t seed = 0x5eedULL);

/// Compares the effective Hamiltonians of omega and omega_b: transports
/// the compression of H_omega to range(P) through the intertwiner and
/// certifies that the difference with H_{omega_b} lies in the weak
/// commutant of pi_{omega_b}.
struct HamiltonianRelationReport {
  double commutant_residual = 0.0;  // max_i ||[Delta, pi_b(B_i)]||_F
  double delta_norm = 0.0;          // ||Delta||_F
  double base_residual = 0.0;       // spatiality residual for omega
  double modified_residual = 0.0;   // spatiality residual for omega_b
};

HamiltonianRelationReport relateEffectiveHamiltonians(const StarAlgebra& a,
                                                      const PositiveFunctional& omega,
                                                      const AlgebraElement& b,
                                                      const Derivation& delta);

/// alpha_t(X) = e^{iht} X e^{-iht} by exact eigendecomposition of h.
Matrix heisenbergEvolve(const Matrix& h, const Matrix& x, double t);

}  // namespace qstar

#endif
