#include "qstar/algebra.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>

#include "pauli_detail.hpp"
#include "qstar/errors.hpp"
#include "qstar/rng.hpp"

namespace qstar {

namespace {

constexpr double kRelTol = 1e-10;

}  // namespace

StarAlgebra StarAlgebra::fullMatrixAlgebra(int n) {
  if (n < 1 || n > 64) throw SizeError("fullMatrixAlgebra: n must lie in [1, 64]");
  StarAlgebra a;
  a.n_ = n;
  a.d_ = n * n;
  a.kind_ = BasisKind::MatrixUnits;
  a.full_ = true;
  a.basis_.reserve(a.d_);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      Matrix e = Matrix::Zero(n, n);
      e(r, c) = 1.0;
      a.basis_.push_back(std::move(e));
    }
  a.identity_coeffs_ = Vector::Zero(a.d_);
  for (int r = 0; r < n; ++r) a.identity_coeffs_(r * n + r) = 1.0;
  a.identity_index_ = (n == 1) ? 0 : -1;
  a.buildStarTable();
  return a;
}

StarAlgebra StarAlgebra::pauliChain(int n_sites) {
  if (n_sites < 0 || n_sites > 6) throw SizeError("pauliChain: n_sites must lie in [0, 6]");
  StarAlgebra a;
  a.sites_ = n_sites;
  a.n_ = 1 << n_sites;
  a.d_ = 1 << (2 * n_sites);
  a.kind_ = BasisKind::PauliWords;
  a.full_ = true;
  a.basis_.reserve(a.d_);
  for (int w = 0; w < a.d_; ++w)
    a.basis_.push_back(detail::pauliWordMatrix(w, n_sites));
  a.identity_index_ = 0;
  a.identity_coeffs_ = Vector::Zero(a.d_);
  a.identity_coeffs_(0) = 1.0;
  a.buildStarTable();
  return a;
}

StarAlgebra StarAlgebra::fromBasis(std::vector<Matrix> basis, bool validate) {
  if (basis.empty()) throw SizeError("fromBasis: empty basis");
  StarAlgebra a;
  a.n_ = static_cast<int>(basis.front().rows());
  a.d_ = static_cast<int>(basis.size());
  a.kind_ = BasisKind::General;
  for (const Matrix& b : basis)
    if (b.rows() != a.n_ || b.cols() != a.n_)
      throw DimensionMismatch("fromBasis: basis matrices must share one square shape");
  a.basis_ = std::move(basis);
  a.finalizeGeneral(validate);
  return a;
}

void StarAlgebra::finalizeGeneral(bool validate) {
  frame_.resize(n_ * n_, d_);
  for (int i = 0; i < d_; ++i) frame_.col(i) = vectorize(basis_[i]);
  frame_qr_.compute(frame_);
  frame_qr_.setThreshold(kRelTol);
  if (frame_qr_.rank() < d_)
    throw ClosureError("fromBasis: basis matrices are linearly dependent");
  full_ = (d_ == n_ * n_);

  computeIdentity();

  // Structure constants and star table by projection; closure residuals
  // checked against the Frobenius norm of what is being expanded.
  mult_table_.resize(d_ * d_, d_);
  double worst = 0.0;
  for (int i = 0; i < d_; ++i) {
    for (int j = 0; j < d_; ++j) {
      const Matrix prod = basis_[i] * basis_[j];
      double res = 0.0;
      const Vector c = project(prod, &res);
      worst = std::max(worst, res);
      mult_table_.row(i * d_ + j) = c.transpose();
    }
  }
  star_table_.resize(d_);
  for (int i = 0; i < d_; ++i) {
    double res = 0.0;
    const Vector c = project(basis_[i].adjoint(), &res);
    worst = std::max(worst, res);
    star_table_[i].terms.clear();
    for (int k = 0; k < d_; ++k)
      if (std::abs(c(k)) > 1e-14) star_table_[i].terms.push_back({k, c(k)});
  }
  if (validate && worst > closure_tol_)
    throw ClosureError("fromBasis: span is not closed under product/adjoint, residual " +
                       std::to_string(worst));
}

void StarAlgebra::computeIdentity() {
  const Matrix id = Matrix::Identity(n_, n_);
  double res = 0.0;
  identity_coeffs_ = project(id, &res);
  if (res > closure_tol_)
    throw ClosureError("fromBasis: span does not contain the identity");
  identity_index_ = -1;
  for (int i = 0; i < d_; ++i) {
    if ((basis_[i] - id).norm() <= kRelTol * std::sqrt(static_cast<double>(n_))) {
      identity_index_ = i;
      break;
    }
  }
}

void StarAlgebra::buildStarTable() {
  star_table_.resize(d_);
  if (kind_ == BasisKind::MatrixUnits) {
    for (int i = 0; i < d_; ++i) {
      const int r = i / n_, c = i % n_;
      star_table_[i].terms = {{c * n_ + r, Complex(1.0)}};
    }
  } else {  // Pauli words are Hermitian
    for (int i = 0; i < d_; ++i) star_table_[i].terms = {{i, Complex(1.0)}};
  }
}

AlgebraElement StarAlgebra::element(const Vector& coeffs) const {
  if (coeffs.size() != d_) throw DimensionMismatch("element: coefficient length mismatch");
  Matrix m = Matrix::Zero(n_, n_);
  for (int i = 0; i < d_; ++i) {
    const Complex c = coeffs(i);
    if (c != 0.0) m += c * basis_[i];
  }
  return {coeffs, std::move(m)};
}

AlgebraElement StarAlgebra::elementFromMatrix(const Matrix& m) const {
  if (m.rows() != n_ || m.cols() != n_)
    throw DimensionMismatch("elementFromMatrix: ambient dimension mismatch");
  double res = 0.0;
  Vector c = project(m, &res);
  if (res > closure_tol_)
    throw ClosureError("elementFromMatrix: matrix leaves the span, residual " +
                       std::to_string(res));
  return {std::move(c), m};
}

Vector StarAlgebra::project(const Matrix& m, double* rel_residual) const {
  Vector c(d_);
  switch (kind_) {
    case BasisKind::MatrixUnits:
      for (int r = 0; r < n_; ++r)
        for (int col = 0; col < n_; ++col) c(r * n_ + col) = m(r, col);
      if (rel_residual) *rel_residual = 0.0;
      return c;
    case BasisKind::PauliWords: {
      const double inv = 1.0 / static_cast<double>(n_);
      for (int w = 0; w < d_; ++w)
        c(w) = (basis_[w].transpose().cwiseProduct(m)).sum() * inv;
      if (rel_residual) *rel_residual = 0.0;
      return c;
    }
    case BasisKind::General:
    default: {
      const Vector rhs = vectorize(m);
      c = frame_qr_.solve(rhs);
      if (rel_residual) {
        const double scale = std::max(rhs.norm(), 1e-300);
        *rel_residual = (frame_ * c - rhs).norm() / scale;
      }
      return c;
    }
  }
}

SparseCoeffs StarAlgebra::basisProduct(int i, int j) const {
  switch (kind_) {
    case BasisKind::MatrixUnits: {
      const int r = i / n_, c = i % n_, k = j / n_, l = j % n_;
      if (c != k) return {};
      return {{{r * n_ + l, Complex(1.0)}}};
    }
    case BasisKind::PauliWords: {
      Complex phase = 1.0;
      int out = 0;
      for (int p = 0; p < sites_; ++p) {
        const int da = (i >> (2 * p)) & 3;
        const int db = (j >> (2 * p)) & 3;
        phase *= detail::pauliPhase[da][db];
        out |= detail::pauliProd[da][db] << (2 * p);
      }
      return {{{out, phase}}};
    }
    case BasisKind::General:
    default: {
      SparseCoeffs out;
      const auto row = mult_table_.row(i * d_ + j);
      for (int k = 0; k < d_; ++k)
        if (std::abs(row(k)) > 1e-14) out.terms.push_back({k, row(k)});
      return out;
    }
  }
}

Vector StarAlgebra::multiplyCoeffs(const Vector& a, const Vector& b) const {
  if (a.size() != d_ || b.size() != d_)
    throw DimensionMismatch("multiplyCoeffs: coefficient length mismatch");
  Vector out = Vector::Zero(d_);
  if (kind_ == BasisKind::General) {
    for (int i = 0; i < d_; ++i) {
      if (a(i) == 0.0) continue;
      for (int j = 0; j < d_; ++j) {
        if (b(j) == 0.0) continue;
        out += (a(i) * b(j)) * mult_table_.row(i * d_ + j).transpose();
      }
    }
    return out;
  }
  for (int i = 0; i < d_; ++i) {
    if (a(i) == 0.0) continue;
    for (int j = 0; j < d_; ++j) {
      if (b(j) == 0.0) continue;
      for (const auto& [k, phase] : basisProduct(i, j).terms) out(k) += a(i) * b(j) * phase;
    }
  }
  return out;
}

Vector StarAlgebra::starCoeffs(const Vector& a) const {
  if (a.size() != d_) throw DimensionMismatch("starCoeffs: coefficient length mismatch");
  Vector out = Vector::Zero(d_);
  for (int i = 0; i < d_; ++i) {
    const Complex c = std::conj(a(i));
    if (c == 0.0) continue;
    for (const auto& [k, s] : star_table_[i].terms) out(k) += c * s;
  }
  return out;
}

AlgebraElement StarAlgebra::multiply(const AlgebraElement& a, const AlgebraElement& b) const {
  if (a.coeffs.size() != d_ || b.coeffs.size() != d_)
    throw DimensionMismatch("multiply: coefficient length mismatch");
  const Matrix prod = a.matrix * b.matrix;
  if (kind_ == BasisKind::General) {
    double res = 0.0;
    Vector c = project(prod, &res);
    if (res > closure_tol_)
      throw ClosureError("multiply: product leaves the span, residual " + std::to_string(res));
    return {std::move(c), prod};
  }
  return {multiplyCoeffs(a.coeffs, b.coeffs), prod};
}

AlgebraElement StarAlgebra::involution(const AlgebraElement& a) const {
  if (a.coeffs.size() != d_) throw DimensionMismatch("involution: coefficient length mismatch");
  const Matrix adj = a.matrix.adjoint();
  if (kind_ == BasisKind::General) {
    double res = 0.0;
    Vector c = project(adj, &res);
    if (res > closure_tol_)
      throw ClosureError("involution: adjoint leaves the span, residual " + std::to_string(res));
    return {std::move(c), adj};
  }
  return {starCoeffs(a.coeffs), adj};
}

Matrix StarAlgebra::leftMultiplicationMatrix(const Vector& a) const {
  if (a.size() != d_)
    throw DimensionMismatch("leftMultiplicationMatrix: coefficient length mismatch");
  Matrix out = Matrix::Zero(d_, d_);
  for (int i = 0; i < d_; ++i) {
    if (a(i) == 0.0) continue;
    for (int j = 0; j < d_; ++j)
      for (const auto& [k, phase] : basisProduct(i, j).terms) out(k, j) += a(i) * phase;
  }
  return out;
}

Matrix StarAlgebra::rightMultipliedBasis(const Vector& b) const {
  if (b.size() != d_)
    throw DimensionMismatch("rightMultipliedBasis: coefficient length mismatch");
  Matrix out = Matrix::Zero(d_, d_);
  for (int i = 0; i < d_; ++i) {
    if (b(i) == 0.0) continue;
    for (int j = 0; j < d_; ++j)
      for (const auto& [k, phase] : basisProduct(j, i).terms) out(k, j) += b(i) * phase;
  }
  return out;
}

Matrix StarAlgebra::gramMatrix(const Vector& values) const {
  if (values.size() != d_) throw DimensionMismatch("gramMatrix: value vector length mismatch");
  Matrix g(d_, d_);
  if (kind_ == BasisKind::General) {
    // omega(B_k B_j) table, then one pass through the star coefficients.
    const Vector u = mult_table_ * values;
    Matrix v(d_, d_);
    for (int k = 0; k < d_; ++k)
      for (int j = 0; j < d_; ++j) v(k, j) = u(k * d_ + j);
    g.setZero();
    for (int i = 0; i < d_; ++i)
      for (const auto& [k, s] : star_table_[i].terms) g.row(i) += s * v.row(k);
    return g;
  }
  for (int i = 0; i < d_; ++i) {
    const auto& star = star_table_[i].terms.front();
    for (int j = 0; j < d_; ++j) {
      Complex acc = 0.0;
      for (const auto& [k, phase] : basisProduct(star.first, j).terms)
        acc += star.second * phase * values(k);
      g(i, j) = acc;
    }
  }
  return g;
}

Complex StarAlgebra::valueOfProduct(const Vector& values, const Vector& a, const Vector& b) const {
  const Vector ab = multiplyCoeffs(a, b);
  return (values.array() * ab.array()).sum();
}

Matrix StarAlgebra::densityFromValues(const Vector& values) const {
  if (!full_)
    throw UnsupportedStructureError(
        "densityFromValues: functional values determine a density matrix only on full matrix "
        "algebras");
  if (values.size() != d_) throw DimensionMismatch("densityFromValues: length mismatch");
  Matrix rho = Matrix::Zero(n_, n_);
  switch (kind_) {
    case BasisKind::MatrixUnits:
      for (int r = 0; r < n_; ++r)
        for (int c = 0; c < n_; ++c) rho(c, r) = values(r * n_ + c);
      return rho;
    case BasisKind::PauliWords: {
      const double inv = 1.0 / static_cast<double>(n_);
      for (int w = 0; w < d_; ++w)
        if (values(w) != 0.0) rho += (values(w) * inv) * basis_[w];
      return rho;
    }
    case BasisKind::General:
    default: {
      Matrix t(d_, n_ * n_);
      for (int i = 0; i < d_; ++i) t.row(i) = vectorize(basis_[i].transpose()).transpose();
      const Vector x = t.colPivHouseholderQr().solve(values);
      return unvectorize(x, n_, n_);
    }
  }
}

PositiveFunctional PositiveFunctional::fromValues(const StarAlgebra& a, Vector values) {
  if (values.size() != a.dim())
    throw DimensionMismatch("PositiveFunctional: value vector length mismatch");
  const Complex unit = (values.array() * a.identityCoeffs().array()).sum();
  const bool is_state = std::abs(unit - 1.0) <= 1e-10;
  return PositiveFunctional(std::move(values), is_state);
}

Complex applyFunctional(const PositiveFunctional& omega, const AlgebraElement& a) {
  if (omega.dim() != a.coeffs.size())
    throw DimensionMismatch("applyFunctional: dimension mismatch");
  return (omega.values().array() * a.coeffs.array()).sum();
}

PositiveFunctional stateFromDensityMatrix(const StarAlgebra& a, const Matrix& rho) {
  if (rho.rows() != a.ambientDim() || rho.cols() != a.ambientDim())
    throw DimensionMismatch("stateFromDensityMatrix: ambient dimension mismatch");
  const double scale = std::max(1.0, rho.norm());
  if ((rho - rho.adjoint()).norm() > 1e-10 * scale)
    throw PositivityError("stateFromDensityMatrix: density matrix is not Hermitian");
  const Eigen::VectorXd ev = hermitianEigenvalues(rho);
  const double top = std::max(ev.maxCoeff(), 1e-300);
  if (ev.minCoeff() < -1e-10 * top)
    throw PositivityError("stateFromDensityMatrix: density matrix is not PSD");
  Vector values(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    values(i) = (rho.cwiseProduct(a.basisMatrix(i).transpose())).sum();
  return PositiveFunctional::fromValues(a, std::move(values));
}

RepresentabilityReport checkRepresentable(const StarAlgebra& a, const PositiveFunctional& omega) {
  RepresentabilityReport report;
  const int d = a.dim();
  const Matrix g = a.gramMatrix(omega.values());
  const Matrix gh = 0.5 * (g + g.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(gh, Eigen::EigenvaluesOnly);
  const double max_eig = std::max(es.eigenvalues().maxCoeff(), 0.0);
  report.min_eigenvalue = es.eigenvalues().minCoeff();
  const double scale = std::max(max_eig, 1e-300);

  // (L1) positivity of the Gram form, including Hermiticity of G itself.
  const double herm_defect = (g - g.adjoint()).norm();
  report.l1_ok = report.min_eigenvalue >= -kRelTol * scale && herm_defect <= kRelTol * std::max(1.0, g.norm());
  double v1 = std::max(0.0, -report.min_eigenvalue);

  // (L2) on the basis; linearity extends it to the whole algebra.
  double v2 = 0.0;
  for (int i = 0; i < d; ++i) {
    Complex star_value = 0.0;
    for (const auto& [k, s] : a.basisStar(i).terms) star_value += s * omega.values()(k);
    v2 = std::max(v2, std::abs(star_value - std::conj(omega.values()(i))));
  }
  const double value_scale = std::max(1.0, omega.values().cwiseAbs().maxCoeff());
  report.l2_ok = v2 <= 1e-10 * value_scale;

  // (L3): gamma_x = sqrt(G_xx); verified on basis pairs and on a seeded
  // sample of coefficient vectors.
  report.gamma.resize(d);
  bool gamma_ok = true;
  for (int i = 0; i < d; ++i) {
    const double gii = std::real(g(i, i));
    if (gii < -kRelTol * scale) gamma_ok = false;
    report.gamma(i) = std::sqrt(std::max(gii, 0.0));
  }
  double v3 = 0.0;
  const double slack = 1e-9 * std::max(1.0, scale);
  for (int i = 0; i < d && gamma_ok; ++i)
    for (int j = 0; j < d; ++j)
      v3 = std::max(v3, std::abs(g(i, j)) - report.gamma(i) * report.gamma(j));
  Rng rng(0x9a3ce5u);
  for (int s = 0; s < 16 && gamma_ok; ++s) {
    const Vector c = rng.gaussianVector(d);
    const double q = std::max(0.0, std::real(inner(Vector(gh * c), c)));
    const Vector gc = g * c;
    for (int i = 0; i < d; ++i)
      v3 = std::max(v3, std::abs(gc(i)) - report.gamma(i) * std::sqrt(q));
  }
  report.l3_ok = gamma_ok && v3 <= slack;
  report.worst_violation = std::max({v1, v2, gamma_ok ? std::max(v3, 0.0) : 1.0});
  return report;
}

}  // namespace qstar
