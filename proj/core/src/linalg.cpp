#include "qstar/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

// SVDs here run on structured matrices whose singular values repeat
// (projections, representation stacks); Eigen 3.4.0's BDCSVD misfactors
// exactly that case, so everything uses JacobiSVD.

#include "qstar/errors.hpp"

namespace qstar {

double operatorNorm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return top > 0 ? std::sqrt(top) : 0.0;
}

bool isHermitian(const Matrix& m, double tol) {
  const double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() <= tol * scale;
}

Eigen::VectorXd hermitianEigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Matrix hermitianSqrt(const Matrix& m, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues();
  const double top = std::max(0.0, ev.maxCoeff());
  if (ev.minCoeff() < -rel_tol * std::max(top, 1e-300))
    throw PositivityError("hermitianSqrt: matrix is not positive semidefinite");
  Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix hermitianInvSqrt(const Matrix& m, double rel_cutoff) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues();
  const double top = std::max(0.0, ev.maxCoeff());
  Eigen::VectorXd inv_root(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    inv_root(i) = ev(i) > rel_cutoff * top && ev(i) > 0 ? 1.0 / std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix pseudoInverse(const Matrix& m, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::VectorXd inv(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    inv(i) = sv(i) > rel_tol * top ? 1.0 / sv(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

int numericalRank(const Matrix& m, double rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Eigen::VectorXd sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * top) ++r;
  return r;
}

Matrix orthonormalRange(const Matrix& m, double rel_tol, int* rank_out) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Eigen::VectorXd sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * top) ++r;
  if (rank_out) *rank_out = r;
  Matrix q = svd.matrixU().leftCols(r);
  fixColumnPhases(q);
  return q;
}

Matrix nullSpaceBasis(const Matrix& m, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * top) ++r;
  Matrix q = svd.matrixV().rightCols(m.cols() - r);
  fixColumnPhases(q);
  return q;
}

Matrix nearestUnitary(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

void fixColumnPhases(Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double biggest = m.col(j).cwiseAbs().maxCoeff();
    if (biggest <= 0) continue;
    Eigen::Index lead = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (std::abs(m(i, j)) > 1e-8 * biggest) {
        lead = i;
        break;
      }
    }
    const Complex z = m(lead, j);
    const double mag = std::abs(z);
    if (mag > 0) m.col(j) *= std::conj(z) / mag;
  }
}

double unitarityDefect(const Matrix& u) {
  const Matrix gram = u.adjoint() * u;
  const double left = (gram - Matrix::Identity(u.cols(), u.cols())).norm();
  if (u.rows() != u.cols()) return left;
  const Matrix cogram = u * u.adjoint();
  const double right = (cogram - Matrix::Identity(u.rows(), u.rows())).norm();
  return std::max(left, right);
}

Matrix conjugateByExponential(const Matrix& h, const Matrix& x, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues();
  Vector phases(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    phases(i) = std::exp(Complex(0.0, ev(i) * t));
  const Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return u * x * u.adjoint();
}

Vector vectorize(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvectorize(const Vector& v, int rows, int cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace qstar
