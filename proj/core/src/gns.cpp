#include "qstar/gns.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "qstar/errors.hpp"
#include "qstar/rng.hpp"

namespace qstar {

GnsTriple gnsConstruct(const StarAlgebra& a, const PositiveFunctional& omega, double tol) {
  const RepresentabilityReport rep_report = checkRepresentable(a, omega);
  if (!rep_report.ok())
    throw RepresentabilityError("gnsConstruct: functional fails (L1)-(L3)");

  const int d = a.dim();
  const Matrix g = a.gramMatrix(omega.values());
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const double top = std::max(ev.maxCoeff(), 0.0);

  int m = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > tol * top) ++m;

  GnsTriple out;
  out.hilbert_dim = m;
  out.rank_tolerance = tol;
  out.gram_scale = top;
  out.source = omega;
  out.lambda = Matrix::Zero(m, d);
  out.rep.assign(d, Matrix::Zero(m, m));
  out.cyclic_vector = Vector::Zero(m);
  if (m == 0) return out;  // omega = 0: legal degenerate triple

  // Retained eigenpairs, descending, with the deterministic phase fix.
  Matrix v(d, m);
  Eigen::VectorXd lam(m);
  for (int k = 0; k < m; ++k) {
    v.col(k) = es.eigenvectors().col(d - 1 - k);
    lam(k) = ev(d - 1 - k);
  }
  fixColumnPhases(v);
  out.lambda = lam.cwiseSqrt().asDiagonal() * v.adjoint();
  // Right pseudo-inverse of lambda; lambda lambda^+ = I_m exactly.
  const Matrix lambda_pinv = v * lam.cwiseSqrt().cwiseInverse().asDiagonal();

  double worst = 0.0;
  for (int i = 0; i < d; ++i) {
    // Column j of l_i holds the coefficients of B_i B_j.
    Matrix li = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j)
      for (const auto& [k, phase] : a.basisProduct(i, j).terms) li(k, j) += phase;
    const Matrix target = out.lambda * li;
    out.rep[i] = target * lambda_pinv;
    const double res = (out.rep[i] * out.lambda - target).norm() /
                       std::max(1.0, target.norm());
    worst = std::max(worst, res);
  }
  if (worst > 1e-9)
    throw NumericalFailureError(
        "gnsConstruct: module-law least squares residual " + std::to_string(worst) +
        " exceeds 1e-9; left multiplication does not preserve the quotient");

  out.cyclic_vector = out.lambda * a.identityCoeffs();
  return out;
}

Vector lambdaOf(const GnsTriple& g, const AlgebraElement& a) {
  if (a.coeffs.size() != g.lambda.cols())
    throw DimensionMismatch("lambdaOf: element belongs to a different algebra");
  return g.lambda * a.coeffs;
}

Matrix representOperator(const GnsTriple& g, const AlgebraElement& x) {
  if (x.coeffs.size() != static_cast<Eigen::Index>(g.rep.size()))
    throw DimensionMismatch("representOperator: element belongs to a different algebra");
  Matrix out = Matrix::Zero(g.hilbert_dim, g.hilbert_dim);
  for (size_t i = 0; i < g.rep.size(); ++i) {
    const Complex c = x.coeffs(static_cast<Eigen::Index>(i));
    if (c != 0.0) out += c * g.rep[i];
  }
  return out;
}

Matrix adjointRepresentOperator(const StarAlgebra& a, const GnsTriple& g,
                                const AlgebraElement& x) {
  return representOperator(g, a.involution(x)).adjoint();
}

double checkSeminormDomination(const StarAlgebra& a, const PositiveFunctional& omega,
                               int restarts, std::uint64_t seed) {
  const int d = a.dim();
  const Matrix g = a.gramMatrix(omega.values());
  const Matrix gh = 0.5 * (g + g.adjoint());
  const double unit_value = std::max(
      0.0, std::real((omega.values().array() * a.identityCoeffs().array()).sum()));
  const double upper = std::sqrt(unit_value);

  auto ratio = [&](const Vector& c) -> double {
    const Matrix m = a.element(c).matrix;
    const double op = operatorNorm(m);
    if (op <= 1e-14) return 0.0;
    const double q = std::max(0.0, std::real(inner(Vector(gh * c), c)));
    return std::sqrt(q) / op;
  };

  // Certified from below by samples; the identity is always one of them.
  double best = ratio(a.identityCoeffs());
  Rng rng(seed);
  for (int r = 0; r < restarts; ++r) {
    Vector c = rng.gaussianVector(d);
    double value = ratio(c);
    double step = 0.5;
    for (int it = 0; it < 60; ++it) {
      Vector candidate = c + step * (gh * c);
      const double cand_value = ratio(candidate);
      if (cand_value > value + 1e-15) {
        c = candidate / candidate.norm();
        value = cand_value;
      } else {
        step *= 0.5;
        if (step < 1e-6) break;
      }
    }
    best = std::max(best, value);
  }
  // For positive functionals omega(a^dagger a) <= omega(e) ||a||_op^2, so the
  // sampled certificate can only fall short by numerical slack.
  return std::min(std::max(best, 0.0), upper > 0 ? upper : best);
}

}  // namespace qstar
