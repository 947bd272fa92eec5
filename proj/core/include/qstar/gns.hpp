#ifndef QSTAR_GNS_HPP
#define QSTAR_GNS_HPP

#include <vector>

#include "qstar/algebra.hpp"

namespace qstar {

/// GNS triple (pi, lambda, H) of a representable functional. The Hilbert
/// space is C^m with m the numerical rank of the Gram matrix; lambda acts
/// on coefficient vectors as the m x d matrix `lambda`, and pi is given on
/// the basis by `rep`. At finite dimension the representation domain is
/// the whole space, the closure is the representation itself and the
/// adjoint representation coincides with pi (asserted in tests, not
/// assumed anywhere).
struct GnsTriple {
  int hilbert_dim = 0;
  Matrix lambda;              // m x d
  std::vector<Matrix> rep;    // d matrices, m x m
  Vector cyclic_vector;       // lambda(e)
  double rank_tolerance = 0.0;
  double gram_scale = 0.0;    // largest Gram eigenvalue, used for degeneracy cutoffs
  PositiveFunctional source;  // empty after deserialization

  /// Closure of the representation; a no-op here since every
  /// finite-dimensional *-representation is closed.
  const GnsTriple& closure() const { return *this; }
};

/// GNS construction: eigendecompose the Gram form, cut eigenvalues below
/// tol * max (quotienting the null space), build lambda from the retained
/// eigenpairs and solve the module law pi(x) lambda(a) = lambda(xa) in
/// least squares over the retained subspace. Throws RepresentabilityError
/// when checkRepresentable fails and NumericalFailureError when a module-law
/// residual exceeds 1e-9.
GnsTriple gnsConstruct(const StarAlgebra& a, const PositiveFunctional& omega, double tol = 1e-10);

/// lambda_omega(a) as a vector in C^m.
Vector lambdaOf(const GnsTriple& g, const AlgebraElement& a);

/// pi_omega(x) as an m x m matrix.
Matrix representOperator(const GnsTriple& g, const AlgebraElement& x);

/// Adjoint representation pi*(x) = pi(x^dagger)^dagger; equal to pi at
/// finite dimension.
Matrix adjointRepresentOperator(const StarAlgebra& a, const GnsTriple& g, const AlgebraElement& x);

/// Smallest kappa with omega(a^dagger a) <= kappa^2 ||a||_op^2, certified
/// from below by projected-ascent samples (8 seeded restarts) and from
/// above by omega(e); for positive functionals the two meet at sqrt(omega(e)).
double checkSeminormDomination(const StarAlgebra& a, const PositiveFunctional& omega,
                               int restarts = 8, std::uint64_t seed = 0x5eedULL);

}  // namespace qstar

#endif
