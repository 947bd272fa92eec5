#ifndef QSTAR_MODIFICATIONS_HPP
#define QSTAR_MODIFICATIONS_HPP

#include <cstdint>
#include <vector>

#include "qstar/gns.hpp"

namespace qstar {

/// omega_b(x) = omega(b^dagger x b). omega(b^dagger b) = 0 yields the zero
/// functional, which is legal output here (only the subspace/intertwiner
/// constructions reject it).
PositiveFunctional localModify(const StarAlgebra& a, const PositiveFunctional& omega,
                               const AlgebraElement& b);

/// The quasi-invariant subspace spanned by {pi(B_i) lambda(b)} with its
/// orthogonal projection.
struct SubRepSubspace {
  Matrix projection;        // m x m Hermitian idempotent
  Matrix basis;             // m x r orthonormal columns
  AlgebraElement generator;
  Vector generator_vector;  // lambda(b)
  int dim() const { return static_cast<int>(basis.cols()); }
};

SubRepSubspace subRepProjection(const StarAlgebra& a, const GnsTriple& g,
                                const AlgebraElement& b);

/// Unitary from range(P_omega^b), in the coordinates of SubRepSubspace::basis,
/// onto the GNS space of omega_b, with U pi(a) lambda(b) = lambda_b(a).
struct Intertwiner {
  Matrix matrix;           // m' x r, r = m'
  double residual = 0.0;   // worst intertwining deviation over the basis
  double unitarity_defect = 0.0;
};

/// Everything produced along the way; the pieces are reused by the
/// effective-Hamiltonian comparison and the direct-sum decomposition.
struct IntertwinerBuild {
  Intertwiner intertwiner;
  SubRepSubspace subspace;
  GnsTriple gns_base;
  GnsTriple gns_modified;
  PositiveFunctional modified;
};

/// Throws NumericalFailureError when the residual exceeds fail_threshold;
/// callers that want a partial report instead pass infinity.
IntertwinerBuild buildIntertwiner(const StarAlgebra& a, const PositiveFunctional& omega,
                                  const AlgebraElement& b, double fail_threshold = 1e-8);
/// Variant reusing an existing GNS triple for omega.
IntertwinerBuild buildIntertwiner(const StarAlgebra& a, const GnsTriple& gns_base,
                                  const AlgebraElement& b, double fail_threshold = 1e-8);

/// Closed-form converse of the modification map on a full matrix algebra:
/// b = rho'^{1/2} rho^{-1/2} for faithful omega. Throws SingularStateError
/// when rho is singular and UnsupportedStructureError off full algebras.
AlgebraElement solveModifier(const StarAlgebra& a, const PositiveFunctional& omega,
                             const PositiveFunctional& omega_prime);

struct ModifierSearchOptions {
  int iterations = 50;
  int restarts = 8;
  std::uint64_t seed = 0x5eedULL;
  double target_residual = 1e-9;
};

/// Heuristic modifier search (Gauss-Newton on Re/Im of b with structured
/// starting points) for the cases the closed form does not cover:
/// non-faithful omega and proper subalgebras. Returns the best candidate
/// with its residual max_i |omega_b(B_i) - omega'(B_i)|; makes no
/// completeness claim.
struct ModifierSearchResult {
  AlgebraElement b;
  double residual = 0.0;
  bool reached_target = false;
};

ModifierSearchResult searchModifier(const StarAlgebra& a, const PositiveFunctional& omega,
                                    const PositiveFunctional& omega_prime,
                                    const ModifierSearchOptions& opts = {});

/// Regularized modifier sequence b_n = rho'^{1/2} (rho + 2^-n I)^{-1/2},
/// n = 1..steps, with convergence diagnostics. omega_{b_n} -> omega'
/// exactly when range(rho') is contained in range(rho).
struct ModifierSequence {
  std::vector<AlgebraElement> steps;
  Eigen::VectorXd sup_errors;         // max_i |omega_{b_n}(B_i) - omega'(B_i)|
  Eigen::VectorXd cauchy_increments;  // ||lambda(b_{n+1}) - lambda(b_n)||
  bool support_compatible = false;    // range(rho') subset of range(rho)
  bool converged(double tol = 1e-6) const {
    return sup_errors.size() > 0 && sup_errors(sup_errors.size() - 1) < tol;
  }
};

ModifierSequence approximateModifierSequence(const StarAlgebra& a,
                                             const PositiveFunctional& omega,
                                             const PositiveFunctional& omega_prime, int steps);

struct EquivalenceReport {
  double max_residual = 0.0;      // max_i ||pi1(B_i) - U^dagger pi2(B_i) U||_F
  double unitarity_defect = 0.0;
};

EquivalenceReport verifyUnitaryEquivalence(const std::vector<Matrix>& rep1,
                                           const std::vector<Matrix>& rep2, const Matrix& u);

}  // namespace qstar

#endif
