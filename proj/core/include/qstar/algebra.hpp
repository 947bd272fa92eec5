#ifndef QSTAR_ALGEBRA_HPP
#define QSTAR_ALGEBRA_HPP

#include <optional>
#include <utility>
#include <vector>

#include "qstar/linalg.hpp"

namespace qstar {

/// How basis products are evaluated. Structured kinds carry exact product
/// rules; General falls back to dense structure constants obtained by
/// Frobenius projection.
enum class BasisKind { MatrixUnits, PauliWords, General };

struct AlgebraElement {
  Vector coeffs;   // expansion in the algebra basis
  Matrix matrix;   // cached dense realization, sum_i coeffs_i B_i
};

/// A coefficient vector with its nonzero entries listed; product rules for
/// structured bases return one term per input pair.
struct SparseCoeffs {
  std::vector<std::pair<int, Complex>> terms;
};

class PositiveFunctional;

/// A finite-dimensional *-algebra realized concretely inside M_n with a
/// distinguished linearly independent basis B_1..B_d whose span contains
/// the identity and is closed under products and adjoints.
class StarAlgebra {
public:
  /// Full matrix algebra M_n with the matrix-unit basis e_00, e_01, ...
  /// ordered row-major. 1 <= n <= 64.
  static StarAlgebra fullMatrixAlgebra(int n);

  /// Tensor power of M_2 with the Pauli-word basis. Word w has digit
  /// w_p in {e, sigma1, sigma2, sigma3} at site p; basis index is
  /// sum_p w_p 4^p, so index 0 is the identity. Site 0 is the leftmost
  /// (most significant) Kronecker factor.
  static StarAlgebra pauliChain(int n_sites);

  /// General algebra from an explicit matrix basis. Validates linear
  /// independence, identity membership and closure unless validate=false
  /// (closure failures then surface later as ClosureError from multiply).
  static StarAlgebra fromBasis(std::vector<Matrix> basis, bool validate = true);

  int ambientDim() const { return n_; }
  int dim() const { return d_; }
  BasisKind kind() const { return kind_; }
  /// True when the basis spans all of M_n.
  bool isFull() const { return full_; }
  int pauliSites() const { return sites_; }

  const Matrix& basisMatrix(int i) const { return basis_[i]; }
  const std::vector<Matrix>& basis() const { return basis_; }

  /// Index of a basis element equal to the identity, or -1 (the identity
  /// is then a proper combination, e.g. sum of e_ii for matrix units).
  int identityIndex() const { return identity_index_; }
  const Vector& identityCoeffs() const { return identity_coeffs_; }
  AlgebraElement identity() const { return element(identity_coeffs_); }

  /// Element from coefficients (caches the dense matrix).
  AlgebraElement element(const Vector& coeffs) const;
  /// Element from a dense matrix; throws ClosureError if it leaves the span.
  AlgebraElement elementFromMatrix(const Matrix& m) const;

  /// Coefficients of the basis expansion of m (least squares for General,
  /// exact formulas for structured kinds). Optional relative residual out.
  Vector project(const Matrix& m, double* rel_residual = nullptr) const;

  /// Structure constants of B_i B_j.
  SparseCoeffs basisProduct(int i, int j) const;

  /// Coefficients of B_i^dagger.
  const SparseCoeffs& basisStar(int i) const { return star_table_[i]; }

  AlgebraElement multiply(const AlgebraElement& a, const AlgebraElement& b) const;
  AlgebraElement involution(const AlgebraElement& a) const;
  Vector multiplyCoeffs(const Vector& a, const Vector& b) const;
  Vector starCoeffs(const Vector& a) const;

  /// Left multiplication by a on coefficient vectors: column j holds the
  /// coefficients of a B_j.
  Matrix leftMultiplicationMatrix(const Vector& a) const;
  /// Column j holds the coefficients of B_j b.
  Matrix rightMultipliedBasis(const Vector& b) const;

  /// Gram matrix G_ij = omega(B_i^dagger B_j) of a functional given by its
  /// basis values.
  Matrix gramMatrix(const Vector& values) const;

  /// omega(a a^dagger) quadratic form used by the derivation bounds.
  Complex valueOfProduct(const Vector& values, const Vector& a, const Vector& b) const;

  /// Density matrix rho with tr(rho B_i) = values_i; requires a full
  /// matrix algebra.
  Matrix densityFromValues(const Vector& values) const;

  double closureTolerance() const { return closure_tol_; }

private:
  StarAlgebra() = default;
  void finalizeGeneral(bool validate);
  void computeIdentity();
  void buildStarTable();

  int n_ = 0;
  int d_ = 0;
  int sites_ = 0;  // PauliWords only
  BasisKind kind_ = BasisKind::General;
  bool full_ = false;
  std::vector<Matrix> basis_;
  int identity_index_ = -1;
  Vector identity_coeffs_;
  std::vector<SparseCoeffs> star_table_;
  // General kind only: dense structure constants, row i*d+j = coeffs(B_i B_j),
  // and the QR of the frame matrix [vec B_1 ... vec B_d] for projections.
  Matrix mult_table_;
  Matrix frame_;
  Eigen::ColPivHouseholderQR<Matrix> frame_qr_;
  double closure_tol_ = 1e-10;
};

/// Linear functional stored by its values on the basis. The Gram matrix
/// G_ij = omega(B_i^dagger B_j) is derived data; obtain it through
/// StarAlgebra::gramMatrix (callers that need it repeatedly keep it).
class PositiveFunctional {
public:
  PositiveFunctional() = default;
  PositiveFunctional(Vector values, bool is_state)
      : values_(std::move(values)), is_state_(is_state) {}

  /// Builds from values, deriving is_state from omega(e).
  static PositiveFunctional fromValues(const StarAlgebra& a, Vector values);

  const Vector& values() const { return values_; }
  bool isState() const { return is_state_; }
  int dim() const { return static_cast<int>(values_.size()); }

private:
  Vector values_;
  bool is_state_ = false;
};

struct RepresentabilityReport {
  bool l1_ok = false;
  bool l2_ok = false;
  bool l3_ok = false;
  double min_eigenvalue = 0.0;      // of the Gram matrix
  Eigen::VectorXd gamma;            // minimal gamma_x per basis index
  double worst_violation = 0.0;
  bool ok() const { return l1_ok && l2_ok && l3_ok; }
};

/// Generator of the canonical test algebra M_n. Throws SizeError outside
/// 1 <= n <= 64.
inline StarAlgebra makeFullMatrixAlgebra(int n) { return StarAlgebra::fullMatrixAlgebra(n); }

Complex applyFunctional(const PositiveFunctional& omega, const AlgebraElement& a);

/// omega(x) = tr(rho x). rho must be Hermitian PSD to 1e-10 relative;
/// is_state is set when tr(rho) = 1 within 1e-10.
PositiveFunctional stateFromDensityMatrix(const StarAlgebra& a, const Matrix& rho);

/// Validates conditions (L1)-(L3). Failures are reported in the flags,
/// never thrown. gamma_x is the norm of a -> omega(x^dagger a) against the
/// seminorm omega(a^dagger a)^{1/2}, which the Gram form makes sqrt(G_xx).
RepresentabilityReport checkRepresentable(const StarAlgebra& a, const PositiveFunctional& omega);

}  // namespace qstar

#endif
