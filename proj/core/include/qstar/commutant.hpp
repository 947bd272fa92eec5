#ifndef QSTAR_COMMUTANT_HPP
#define QSTAR_COMMUTANT_HPP

#include <vector>

#include "qstar/modifications.hpp"

namespace qstar {

/// Basis of {C : C pi(B_i) = pi(B_i) C for all i}, orthonormal in the
/// Frobenius inner product. The weak commutant collapses to this plain
/// commutant at finite dimension; closure under product and adjoint is
/// computed, not assumed.
struct CommutantBasis {
  int dimension = 0;
  std::vector<Matrix> basis;
  bool is_star_closed = false;
  bool is_algebra_closed = false;
  double worst_commutation = 0.0;
};

CommutantBasis weakCommutant(const std::vector<Matrix>& rep, double tol = 1e-10);

struct CommutantEqualityReport {
  bool equal = false;
  double mutual_residual = 0.0;  // worst projection defect between the two spans
  int dim_full = 0;
  int dim_generating = 0;
  int generated_dim = 0;  // dimension of the algebra generated by the subset
};

/// Prop-11-style check: the commutant of a generating subset equals the
/// commutant of the whole representation. Throws NotGeneratingError when
/// the iterated-products span of the subset does not reach the span of
/// rep_full.
CommutantEqualityReport checkCommutantEquality(const std::vector<Matrix>& rep_full,
                                               const std::vector<Matrix>& rep_generating);

struct ProjectionMembership {
  bool in_commutant = false;
  double residual = 0.0;
};

/// Membership of a Hermitian idempotent in the commutant of rep.
ProjectionMembership projectionInCommutant(const Matrix& p, const std::vector<Matrix>& rep,
                                           double tol = 1e-9);

struct DirectSumBlock {
  int dim = 0;
  double equivalence_residual = 0.0;
};

struct DirectSumReport {
  double orthogonality_max = 0.0;    // max ||P_g P_g'|| over distinct pairs
  double completeness_residual = 0.0;  // ||sum P_g - I||
  std::vector<DirectSumBlock> blocks;
  bool orthogonal = false;
  bool complete = false;
  bool equivalent = false;           // every block matched its GNS rep
  Matrix block_unitary;              // V with V^dagger pi(x) V block diagonal
  bool pass() const { return orthogonal && complete && equivalent; }
};

/// Decomposition of pi_omega along the subspaces generated by the b_gamma:
/// verifies mutual orthogonality, completeness, and per-block unitary
/// equivalence with pi_{omega_{b_gamma}}. Failed clauses yield a partial
/// report rather than an error.
DirectSumReport decomposeDirectSum(const StarAlgebra& a, const PositiveFunctional& omega,
                                   const std::vector<AlgebraElement>& generators);

struct SelfAdjointElementReport {
  double projection_defect = 0.0;    // max(||P^2 - P||, ||P - P*||)
  double invariance_residual = 0.0;  // ||(I - P) pi(B_i) P|| over the basis
  double compression_residual = 0.0; // restricted pi vs P pi P on range(P)
  bool trivially_self_adjoint = true;  // finite dimension makes pi~ self-adjoint
  bool pass(double tol = 1e-9) const {
    return projection_defect < tol && invariance_residual < tol &&
           compression_residual < tol;
  }
};

/// Residual form of the self-adjoint-element clauses; the defining notion
/// is automatic at finite dimension and flagged as such.
SelfAdjointElementReport selfAdjointElementCheck(const StarAlgebra& a,
                                                 const PositiveFunctional& omega,
                                                 const AlgebraElement& b);

}  // namespace qstar

#endif
