#include "qstar/modifications.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "qstar/errors.hpp"
#include "qstar/rng.hpp"

namespace qstar {

namespace {

Vector valuesFromDensity(const StarAlgebra& a, const Matrix& rho) {
  Vector values(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    values(i) = (rho.cwiseProduct(a.basisMatrix(i).transpose())).sum();
  return values;
}

/// Projector onto the range of a Hermitian PSD matrix at a relative cutoff.
Matrix rangeProjector(const Matrix& rho, double rel_tol = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  Matrix p = Matrix::Zero(rho.rows(), rho.cols());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > rel_tol * top)
      p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  return p;
}

}  // namespace

PositiveFunctional localModify(const StarAlgebra& a, const PositiveFunctional& omega,
                               const AlgebraElement& b) {
  if (omega.dim() != a.dim() || b.coeffs.size() != a.dim())
    throw DimensionMismatch("localModify: dimension mismatch");
  if (a.isFull()) {
    const Matrix rho = a.densityFromValues(omega.values());
    const Matrix rho_b = b.matrix * rho * b.matrix.adjoint();
    return PositiveFunctional::fromValues(a, valuesFromDensity(a, rho_b));
  }
  // b^dagger B_i b through the coefficient machinery.
  const Vector b_star = a.starCoeffs(b.coeffs);
  const Matrix left = a.leftMultiplicationMatrix(b_star);  // col i = coeffs(b* B_i)
  Vector values(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    const Vector full = a.multiplyCoeffs(left.col(i), b.coeffs);
    values(i) = (omega.values().array() * full.array()).sum();
  }
  return PositiveFunctional::fromValues(a, std::move(values));
}

SubRepSubspace subRepProjection(const StarAlgebra& a, const GnsTriple& g,
                                const AlgebraElement& b) {
  if (b.coeffs.size() != a.dim() || g.lambda.cols() != a.dim())
    throw DimensionMismatch("subRepProjection: element belongs to a different algebra");
  const Vector lambda_b = g.lambda * b.coeffs;
  const double norm_sq = lambda_b.squaredNorm();
  if (norm_sq <= g.rank_tolerance * std::max(g.gram_scale, 1e-300))
    throw DegenerateGeneratorError(
        "subRepProjection: omega(b*b) below the rank tolerance", norm_sq);

  // Columns lambda(B_i b) = pi(B_i) lambda(b). Their Gram matrix is the
  // omega_b Gram, whose eigenvalues are these singular values squared, so
  // the rank cut happens at sqrt(rank_tolerance) to match the quotient
  // convention of gnsConstruct exactly (the direct-sum bookkeeping relies
  // on both ranks agreeing).
  const Matrix span = g.lambda * a.rightMultipliedBasis(b.coeffs);
  SubRepSubspace out;
  out.basis = orthonormalRange(span, std::sqrt(g.rank_tolerance));
  out.projection = out.basis * out.basis.adjoint();
  out.generator = b;
  out.generator_vector = lambda_b;
  return out;
}

IntertwinerBuild buildIntertwiner(const StarAlgebra& a, const GnsTriple& gns_base,
                                  const AlgebraElement& b, double fail_threshold) {
  IntertwinerBuild out;
  out.gns_base = gns_base;
  out.subspace = subRepProjection(a, gns_base, b);
  out.modified = localModify(a, gns_base.source, b);
  out.gns_modified = gnsConstruct(a, out.modified, gns_base.rank_tolerance);

  const int r = out.subspace.dim();
  if (r != out.gns_modified.hilbert_dim)
    throw NumericalFailureError(
        "buildIntertwiner: subspace dimension " + std::to_string(r) +
        " differs from GNS dimension of omega_b " +
        std::to_string(out.gns_modified.hilbert_dim));

  // U (Q^dagger pi(B_i) lambda(b)) = lambda_b(B_i): both sides carry the same
  // Gram form, so the least-squares U is unitary in exact arithmetic and the
  // polar factor removes roundoff.
  const Matrix x = gns_base.lambda * a.rightMultipliedBasis(b.coeffs);
  const Matrix w = out.subspace.basis.adjoint() * x;  // r x d
  const Matrix& y = out.gns_modified.lambda;          // r x d
  Matrix u = y * pseudoInverse(w);
  u = nearestUnitary(u);

  double residual = (u * w - y).norm() / std::max(1.0, y.norm());
  for (int i = 0; i < a.dim(); ++i) {
    const Matrix sub_op =
        out.subspace.basis.adjoint() * gns_base.rep[i] * out.subspace.basis;
    residual = std::max(residual,
                        (out.gns_modified.rep[i] * u - u * sub_op).norm());
  }
  out.intertwiner.matrix = u;
  out.intertwiner.residual = residual;
  out.intertwiner.unitarity_defect = unitarityDefect(u);
  if (residual > fail_threshold)
    throw NumericalFailureError("buildIntertwiner: intertwining residual " +
                                std::to_string(residual) + " exceeds threshold");
  return out;
}

IntertwinerBuild buildIntertwiner(const StarAlgebra& a, const PositiveFunctional& omega,
                                  const AlgebraElement& b, double fail_threshold) {
  return buildIntertwiner(a, gnsConstruct(a, omega), b, fail_threshold);
}

AlgebraElement solveModifier(const StarAlgebra& a, const PositiveFunctional& omega,
                             const PositiveFunctional& omega_prime) {
  if (!a.isFull())
    throw UnsupportedStructureError(
        "solveModifier: closed form requires a full matrix algebra; use searchModifier");
  const Matrix rho = a.densityFromValues(omega.values());
  const Matrix rho_prime = a.densityFromValues(omega_prime.values());
  const Eigen::VectorXd ev = hermitianEigenvalues(rho);
  const double top = std::max(ev.maxCoeff(), 0.0);
  if (ev.minCoeff() <= 1e-10 * std::max(top, 1e-300))
    throw SingularStateError(
        "solveModifier: omega is not faithful; use approximateModifierSequence");

  const Matrix b_mat = hermitianSqrt(rho_prime) * hermitianInvSqrt(rho, 1e-14);
  const AlgebraElement b = a.elementFromMatrix(b_mat);

  const PositiveFunctional check = localModify(a, omega, b);
  const double scale = std::max(1.0, omega_prime.values().cwiseAbs().maxCoeff());
  const double deviation =
      (check.values() - omega_prime.values()).cwiseAbs().maxCoeff();
  if (deviation > 1e-9 * scale)
    throw NumericalFailureError("solveModifier: verification residual " +
                                std::to_string(deviation));
  return b;
}

namespace {

/// Gauss-Newton polish of b (matrix form, full algebras).
double polishFull(const StarAlgebra& a, const Matrix& rho, const Vector& target, Matrix& b,
                  int iterations, double target_residual) {
  const int n = a.ambientDim();
  const int d = a.dim();
  auto residualOf = [&](const Matrix& cand) {
    const Vector vals = valuesFromDensity(a, cand * rho * cand.adjoint());
    return (vals - target).cwiseAbs().maxCoeff();
  };
  double best = residualOf(b);
  for (int it = 0; it < iterations && best > target_residual; ++it) {
    const Vector vals = valuesFromDensity(a, b * rho * b.adjoint());
    Eigen::VectorXd r(2 * d);
    Eigen::MatrixXd j(2 * d, 2 * n * n);
    for (int i = 0; i < d; ++i) {
      const Complex ri = vals(i) - target(i);
      r(2 * i) = std::real(ri);
      r(2 * i + 1) = std::imag(ri);
      const Matrix grad_holo = (rho * b.adjoint() * a.basisMatrix(i)).transpose();
      const Matrix grad_anti = a.basisMatrix(i) * b * rho;
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          const int col = p * n + q;
          const Complex dre = grad_holo(p, q) + grad_anti(p, q);
          const Complex dim = Complex(0, 1) * (grad_holo(p, q) - grad_anti(p, q));
          j(2 * i, col) = std::real(dre);
          j(2 * i + 1, col) = std::imag(dre);
          j(2 * i, n * n + col) = std::real(dim);
          j(2 * i + 1, n * n + col) = std::imag(dim);
        }
    }
    const Eigen::VectorXd step = j.colPivHouseholderQr().solve(r);
    // Backtracking on the Gauss-Newton direction.
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 8; ++ls) {
      Matrix cand = b;
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          cand(p, q) -= t * Complex(step(p * n + q), step(n * n + p * n + q));
      const double res = residualOf(cand);
      if (res < best) {
        b = cand;
        best = res;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace

ModifierSearchResult searchModifier(const StarAlgebra& a, const PositiveFunctional& omega,
                                    const PositiveFunctional& omega_prime,
                                    const ModifierSearchOptions& opts) {
  const int n = a.ambientDim();
  const int d = a.dim();
  Rng rng(opts.seed);

  if (a.isFull()) {
    const Matrix rho = a.densityFromValues(omega.values());
    const Matrix rho_prime = a.densityFromValues(omega_prime.values());

    std::vector<Matrix> starts;
    // Support-compatible closed form: with rho = Q D Q* (rank r) and
    // rho' = Q' D' Q'* (rank r'), r' <= r, the matrix
    // b = Q' D'^{1/2} [I 0] D^{-1/2} Q* satisfies b rho b* = rho' exactly.
    {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
      Eigen::SelfAdjointEigenSolver<Matrix> esp(0.5 * (rho_prime + rho_prime.adjoint()));
      const double top = std::max(es.eigenvalues().maxCoeff(), 1e-300);
      const double topp = std::max(esp.eigenvalues().maxCoeff(), 0.0);
      std::vector<int> keep, keepp;
      for (int i = n - 1; i >= 0; --i) {
        if (es.eigenvalues()(i) > 1e-12 * top) keep.push_back(i);
        if (esp.eigenvalues()(i) > 1e-12 * std::max(topp, 1e-300)) keepp.push_back(i);
      }
      const int r = static_cast<int>(keep.size());
      const int rp = static_cast<int>(keepp.size());
      if (rp <= r && r > 0) {
        Matrix q(n, r), qp(n, rp);
        Eigen::VectorXd dr(r), dp(rp);
        for (int k = 0; k < r; ++k) {
          q.col(k) = es.eigenvectors().col(keep[k]);
          dr(k) = es.eigenvalues()(keep[k]);
        }
        for (int k = 0; k < rp; ++k) {
          qp.col(k) = esp.eigenvectors().col(keepp[k]);
          dp(k) = esp.eigenvalues()(keepp[k]);
        }
        Matrix sel = Matrix::Zero(rp, r);
        for (int k = 0; k < rp; ++k) sel(k, k) = 1.0;
        starts.push_back(qp * dp.cwiseSqrt().asDiagonal() * sel *
                         dr.cwiseSqrt().cwiseInverse().asDiagonal() * q.adjoint());
      }
    }
    // Regularized sequence endpoint and the identity.
    {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
      const Eigen::VectorXd shifted = es.eigenvalues().cwiseMax(0.0).array() + 0x1p-20;
      const Matrix inv_root = es.eigenvectors() *
                              shifted.cwiseSqrt().cwiseInverse().asDiagonal() *
                              es.eigenvectors().adjoint();
      starts.push_back(hermitianSqrt(rho_prime) * inv_root);
    }
    starts.push_back(Matrix::Identity(n, n));
    for (int rstart = 0; rstart < opts.restarts; ++rstart)
      starts.push_back(rng.gaussianMatrix(n, n) / std::sqrt(static_cast<double>(n)));

    Matrix best_b = starts.front();
    double best = std::numeric_limits<double>::infinity();
    for (Matrix start : starts) {
      const double res = polishFull(a, rho, omega_prime.values(), start, opts.iterations,
                                    opts.target_residual);
      if (res < best) {
        best = res;
        best_b = start;
        if (best <= opts.target_residual) break;
      }
    }
    ModifierSearchResult out{a.elementFromMatrix(best_b), best,
                             best <= opts.target_residual};
    return out;
  }

  // Proper subalgebra: Gauss-Newton over coefficients with a finite-difference
  // Jacobian. d is small in this regime.
  auto residualOf = [&](const Vector& coeffs) {
    const PositiveFunctional mod = localModify(a, omega, a.element(coeffs));
    return (mod.values() - omega_prime.values()).cwiseAbs().maxCoeff();
  };
  auto residualVec = [&](const Vector& coeffs) {
    const PositiveFunctional mod = localModify(a, omega, a.element(coeffs));
    const Vector diff = mod.values() - omega_prime.values();
    Eigen::VectorXd r(2 * d);
    for (int i = 0; i < d; ++i) {
      r(2 * i) = std::real(diff(i));
      r(2 * i + 1) = std::imag(diff(i));
    }
    return r;
  };

  std::vector<Vector> starts;
  starts.push_back(a.identityCoeffs());
  for (int rstart = 0; rstart < opts.restarts; ++rstart)
    starts.push_back(rng.gaussianVector(d));

  Vector best_c = starts.front();
  double best = std::numeric_limits<double>::infinity();
  const double h = 1e-6;
  for (Vector c : starts) {
    double res = residualOf(c);
    for (int it = 0; it < opts.iterations && res > opts.target_residual; ++it) {
      const Eigen::VectorXd r0 = residualVec(c);
      Eigen::MatrixXd j(2 * d, 2 * d);
      for (int k = 0; k < d; ++k) {
        Vector cp = c;
        cp(k) += h;
        j.col(2 * k) = (residualVec(cp) - r0) / h;
        cp = c;
        cp(k) += Complex(0, h);
        j.col(2 * k + 1) = (residualVec(cp) - r0) / h;
      }
      const Eigen::VectorXd step = j.colPivHouseholderQr().solve(r0);
      double t = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 8; ++ls) {
        Vector cand = c;
        for (int k = 0; k < d; ++k) cand(k) -= t * Complex(step(2 * k), step(2 * k + 1));
        const double cand_res = residualOf(cand);
        if (cand_res < res) {
          c = cand;
          res = cand_res;
          improved = true;
          break;
        }
        t *= 0.5;
      }
      if (!improved) break;
    }
    if (res < best) {
      best = res;
      best_c = c;
      if (best <= opts.target_residual) break;
    }
  }
  return {a.element(best_c), best, best <= opts.target_residual};
}

ModifierSequence approximateModifierSequence(const StarAlgebra& a,
                                             const PositiveFunctional& omega,
                                             const PositiveFunctional& omega_prime, int steps) {
  if (steps < 1) throw SizeError("approximateModifierSequence: steps must be >= 1");
  if (!a.isFull())
    throw UnsupportedStructureError(
        "approximateModifierSequence: requires a full matrix algebra");

  const Matrix rho = a.densityFromValues(omega.values());
  const Matrix rho_prime = a.densityFromValues(omega_prime.values());
  const Matrix root_prime = hermitianSqrt(rho_prime);

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);

  ModifierSequence out;
  out.steps.reserve(steps);
  out.sup_errors.resize(steps);
  out.cauchy_increments.resize(std::max(steps - 1, 0));

  const Matrix p = rangeProjector(rho);
  const Matrix complement = Matrix::Identity(rho.rows(), rho.cols()) - p;
  out.support_compatible = (complement * root_prime).norm() <=
                           1e-8 * std::max(1.0, root_prime.norm());

  const GnsTriple g = gnsConstruct(a, omega);
  Vector prev_lambda;
  for (int n = 1; n <= steps; ++n) {
    const double eps = std::ldexp(1.0, -n);
    const Eigen::VectorXd shifted = ev.array() + eps;
    const Matrix inv_root = es.eigenvectors() *
                            shifted.cwiseSqrt().cwiseInverse().asDiagonal() *
                            es.eigenvectors().adjoint();
    const AlgebraElement b = a.elementFromMatrix(root_prime * inv_root);
    const Vector values = valuesFromDensity(a, b.matrix * rho * b.matrix.adjoint());
    out.sup_errors(n - 1) = (values - omega_prime.values()).cwiseAbs().maxCoeff();
    const Vector lb = g.lambda * b.coeffs;
    if (n > 1) out.cauchy_increments(n - 2) = (lb - prev_lambda).norm();
    prev_lambda = lb;
    out.steps.push_back(b);
  }
  return out;
}

EquivalenceReport verifyUnitaryEquivalence(const std::vector<Matrix>& rep1,
                                           const std::vector<Matrix>& rep2, const Matrix& u) {
  if (rep1.size() != rep2.size())
    throw DimensionMismatch("verifyUnitaryEquivalence: representation sizes differ");
  EquivalenceReport out;
  out.unitarity_defect = unitarityDefect(u);
  for (size_t i = 0; i < rep1.size(); ++i) {
    if (rep2[i].rows() != u.rows() || rep1[i].rows() != u.cols())
      throw DimensionMismatch("verifyUnitaryEquivalence: dimension mismatch");
    out.max_residual =
        std::max(out.max_residual, (rep1[i] - u.adjoint() * rep2[i] * u).norm());
  }
  return out;
}

}  // namespace qstar
