#include "qstar/derivations.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "qstar/errors.hpp"
#include "qstar/rng.hpp"

namespace qstar {

namespace {

struct KernelCertificate {
  double certificate = 0.0;
  int kernel_dim = 0;
  Vector witness;
};

KernelCertificate kernelCertificate(const StarAlgebra& a, const GnsTriple& g,
                                    const Derivation& delta) {
  KernelCertificate out;
  const int d = a.dim();
  const int m = g.hilbert_dim;
  Matrix stacked(m * m, d);
  for (int i = 0; i < d; ++i) stacked.col(i) = vectorize(g.rep[i]);
  const Matrix kernel = nullSpaceBasis(stacked, 1e-10);
  out.kernel_dim = static_cast<int>(kernel.cols());
  for (int k = 0; k < kernel.cols(); ++k) {
    const Vector image_coeffs = delta.map * kernel.col(k);
    Matrix image = Matrix::Zero(m, m);
    for (int i = 0; i < d; ++i)
      if (image_coeffs(i) != 0.0) image += image_coeffs(i) * g.rep[i];
    const double norm = image.norm();
    if (norm > out.certificate) {
      out.certificate = norm;
      out.witness = kernel.col(k);
    }
  }
  return out;
}

}  // namespace

Derivation innerDerivation(const StarAlgebra& a, const AlgebraElement& h) {
  const double scale = std::max(1.0, h.matrix.norm());
  if ((h.matrix - h.matrix.adjoint()).norm() > 1e-10 * scale)
    throw PositivityError("innerDerivation: generator must be Hermitian");
  const Complex i_unit(0.0, 1.0);
  const Matrix map =
      i_unit * (a.leftMultiplicationMatrix(h.coeffs) - a.rightMultipliedBasis(h.coeffs));
  const DerivationCheck check = checkDerivation(a, map);
  return check.derivation;
}

DerivationCheck checkDerivation(const StarAlgebra& a, const Matrix& map) {
  if (map.rows() != a.dim() || map.cols() != a.dim())
    throw DimensionMismatch("checkDerivation: map must act on coefficient vectors");
  DerivationCheck out;
  const int d = a.dim();
  const double scale = std::max(1.0, map.norm());

  for (int i = 0; i < d; ++i) {
    Vector star_i = Vector::Zero(d);
    for (const auto& [k, s] : a.basisStar(i).terms) star_i(k) = s;
    const Vector lhs = map * star_i;                  // delta(B_i^dagger)
    const Vector rhs = a.starCoeffs(map.col(i));      // delta(B_i)^dagger
    out.worst_star = std::max(out.worst_star, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  out.star_ok = out.worst_star <= 1e-10 * scale;

  for (int i = 0; i < d; ++i) {
    Vector ei = Vector::Zero(d);
    ei(i) = 1.0;
    const Vector di = map.col(i);
    for (int j = 0; j < d; ++j) {
      Vector ej = Vector::Zero(d);
      ej(j) = 1.0;
      Vector product = Vector::Zero(d);
      for (const auto& [k, phase] : a.basisProduct(i, j).terms) product(k) += phase;
      const Vector lhs = map * product;
      const Vector rhs = a.multiplyCoeffs(ei, map.col(j)) + a.multiplyCoeffs(di, ej);
      const double dev = (lhs - rhs).cwiseAbs().maxCoeff();
      if (dev > out.worst_leibniz) {
        out.worst_leibniz = dev;
        out.witness_i = i;
        out.witness_j = j;
      }
    }
  }
  out.leibniz_ok = out.worst_leibniz <= 1e-10 * scale;
  out.derivation = {map, out.star_ok, out.leibniz_ok};
  return out;
}

AlgebraElement applyDerivation(const StarAlgebra& a, const Derivation& delta,
                               const AlgebraElement& x) {
  if (delta.map.cols() != x.coeffs.size() || delta.map.rows() != a.dim())
    throw DimensionMismatch("applyDerivation: dimension mismatch");
  return a.element(delta.map * x.coeffs);
}

InducedDerivation inducedDerivation(const StarAlgebra& a, const GnsTriple& g,
                                    const Derivation& delta) {
  if (delta.map.rows() != a.dim())
    throw DimensionMismatch("inducedDerivation: derivation acts on a different algebra");
  const KernelCertificate cert = kernelCertificate(a, g, delta);
  InducedDerivation out;
  out.certificate = cert.certificate;
  out.kernel_dim = cert.kernel_dim;
  out.well_defined = cert.certificate < 1e-9;
  out.witness = cert.witness;
  if (!out.well_defined) {
    std::vector<Complex> witness(cert.witness.data(),
                                 cert.witness.data() + cert.witness.size());
    throw NotWellDefinedError(
        "inducedDerivation: pi(a) = 0 does not force pi(delta(a)) = 0, certificate " +
            std::to_string(cert.certificate),
        cert.certificate, std::move(witness));
  }
  out.delta_rep.reserve(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    const Vector coeffs = delta.map.col(i);
    Matrix image = Matrix::Zero(g.hilbert_dim, g.hilbert_dim);
    for (int k = 0; k < a.dim(); ++k)
      if (coeffs(k) != 0.0) image += coeffs(k) * g.rep[k];
    out.delta_rep.push_back(std::move(image));
  }
  return out;
}

namespace {

/// Basis indices the least-squares system is assembled over. Leibniz
/// propagates the commutator equation from generators to products, so
/// single-site words suffice for Pauli chains; the residual is always
/// verified over the full basis afterwards.
std::vector<int> spatialGenerators(const StarAlgebra& a) {
  std::vector<int> out;
  if (a.kind() == BasisKind::PauliWords) {
    for (int p = 0; p < a.pauliSites(); ++p)
      for (int axis = 1; axis <= 3; ++axis) out.push_back(axis << (2 * p));
    return out;
  }
  out.resize(a.dim());
  for (int i = 0; i < a.dim(); ++i) out[i] = i;
  return out;
}

/// Frobenius-orthonormal basis of Hermitian m x m matrices, fixed order.
std::vector<Matrix> hermitianBasis(int m) {
  std::vector<Matrix> out;
  out.reserve(m * m);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < m; ++k) {
    Matrix e = Matrix::Zero(m, m);
    e(k, k) = 1.0;
    out.push_back(std::move(e));
  }
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q) {
      Matrix re = Matrix::Zero(m, m);
      re(p, q) = inv_sqrt2;
      re(q, p) = inv_sqrt2;
      out.push_back(std::move(re));
      Matrix im = Matrix::Zero(m, m);
      im(p, q) = Complex(0, inv_sqrt2);
      im(q, p) = Complex(0, -inv_sqrt2);
      out.push_back(std::move(im));
    }
  return out;
}

}  // namespace

EffectiveHamiltonian solveSpatial(const StarAlgebra& a, const GnsTriple& g,
                                  const Derivation& delta, double threshold) {
  const InducedDerivation induced = inducedDerivation(a, g, delta);
  const int m = g.hilbert_dim;
  EffectiveHamiltonian out;
  out.matrix = Matrix::Zero(m, m);
  if (m == 0) {
    out.spatial = true;
    return out;
  }

  const std::vector<int> generators = spatialGenerators(a);
  const std::vector<Matrix> herm = hermitianBasis(m);
  const int unknowns = static_cast<int>(herm.size());
  const int rows = 2 * m * m * static_cast<int>(generators.size());
  Eigen::MatrixXd system(rows, unknowns);
  Eigen::VectorXd rhs(rows);
  const Complex i_unit(0.0, 1.0);

  int row0 = 0;
  for (const int gidx : generators) {
    const Matrix& pi_g = g.rep[gidx];
    for (int k = 0; k < unknowns; ++k) {
      const Matrix column = i_unit * (herm[k] * pi_g - pi_g * herm[k]);
      const Vector vec = vectorize(column);
      for (int t = 0; t < m * m; ++t) {
        system(row0 + 2 * t, k) = std::real(vec(t));
        system(row0 + 2 * t + 1, k) = std::imag(vec(t));
      }
    }
    const Vector target = vectorize(induced.delta_rep[gidx]);
    for (int t = 0; t < m * m; ++t) {
      rhs(row0 + 2 * t) = std::real(target(t));
      rhs(row0 + 2 * t + 1) = std::imag(target(t));
    }
    row0 += 2 * m * m;
  }

  // Minimal-norm least squares via the SVD factors. JacobiSVD throughout:
  // Eigen 3.4.0's BDCSVD misfactors matrices with repeated singular values,
  // which these structured systems have.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double sv_top = sv.size() > 0 ? sv(0) : 0.0;
  double sv_kept_min = sv_top;
  Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-12 * sv_top) {
      inv_sv(i) = 1.0 / sv(i);
      sv_kept_min = sv(i);
    }
  }
  const Eigen::VectorXd solution =
      svd.matrixV() * (inv_sv.asDiagonal() * (svd.matrixU().transpose() * rhs));
  out.condition = sv_kept_min > 0 ? sv_top / sv_kept_min : 0.0;
  out.conditioning_warning = out.condition > 1e12;

  for (int k = 0; k < unknowns; ++k)
    if (solution(k) != 0.0) out.matrix += solution(k) * herm[k];

  // Gauge: scalar shift putting <H xi, xi> = 0; I always commutes.
  const Vector& xi = g.cyclic_vector;
  const double xi_norm_sq = xi.squaredNorm();
  if (xi_norm_sq > 0) {
    out.scalar_shift = std::real(inner(Vector(out.matrix * xi), xi)) / xi_norm_sq;
    out.matrix -= out.scalar_shift * Matrix::Identity(m, m);
  }
  out.cyclic_image_norm = (out.matrix * xi).norm();

  for (int i = 0; i < a.dim(); ++i) {
    const Matrix commutator =
        i_unit * (out.matrix * g.rep[i] - g.rep[i] * out.matrix);
    out.residual = std::max(out.residual, (induced.delta_rep[i] - commutator).norm());
  }
  out.spatial = out.residual < threshold;
  return out;
}

BoundReport estimateBoundConstant(const StarAlgebra& a, const PositiveFunctional& omega,
                                  const Derivation& delta, int restarts, std::uint64_t seed) {
  const int d = a.dim();
  const Matrix g = a.gramMatrix(omega.values());
  const Matrix gh = 0.5 * (g + g.adjoint());
  if (gh.norm() <= 1e-14 && omega.values().cwiseAbs().maxCoeff() <= 1e-14)
    throw DegenerateGeneratorError("estimateBoundConstant: omega vanishes", 0.0);

  auto denominator = [&](const Vector& c) -> double {
    const double q1 = std::max(0.0, std::real(inner(Vector(gh * c), c)));
    const Vector sc = a.starCoeffs(c);
    const double q2 = std::max(0.0, std::real(inner(Vector(gh * sc), sc)));
    return std::sqrt(q1) + std::sqrt(q2);
  };
  auto ratio = [&](const Vector& c) -> double {
    const double den = denominator(c);
    if (den <= 1e-12) return 0.0;
    const Complex num = (omega.values().array() * (delta.map * c).array()).sum();
    return std::abs(num) / den;
  };

  BoundReport out;
  Rng rng(seed);
  std::vector<Vector> candidates;
  for (int i = 0; i < d; ++i) {
    Vector e = Vector::Zero(d);
    e(i) = 1.0;
    candidates.push_back(e);
    candidates.push_back(delta.map.col(i));  // commutator-aligned
  }
  for (int r = 0; r < restarts; ++r) candidates.push_back(rng.gaussianVector(d));

  for (const Vector& c0 : candidates) {
    if (c0.norm() <= 1e-14) continue;
    Vector c = c0 / c0.norm();
    double value = ratio(c);
    double step = 0.3;
    for (int it = 0; it < 150 && step > 1e-7; ++it) {
      // numeric gradient over Re/Im coordinates
      Vector grad = Vector::Zero(d);
      const double h = 1e-6;
      for (int k = 0; k < d; ++k) {
        Vector cp = c;
        cp(k) += h;
        const double dre = (ratio(cp) - value) / h;
        cp = c;
        cp(k) += Complex(0, h);
        const double dim = (ratio(cp) - value) / h;
        grad(k) = Complex(dre, dim);
      }
      const double gnorm = grad.norm();
      if (gnorm <= 1e-12) break;
      Vector cand = c + (step / gnorm) * grad;
      cand /= cand.norm();
      const double cand_value = ratio(cand);
      if (cand_value > value + 1e-14) {
        c = cand;
        value = cand_value;
      } else {
        step *= 0.5;
      }
    }
    out.c_lower = std::max(out.c_lower, value);
    ++out.samples;
  }

  out.kappa = checkSeminormDomination(a, omega);
  try {
    const GnsTriple triple = gnsConstruct(a, omega);
    const EffectiveHamiltonian ham = solveSpatial(a, triple, delta);
    if (ham.spatial) {
      out.c_upper = ham.cyclic_image_norm;
      out.has_upper = true;
    }
  } catch (const Error&) {
    // no certified upper bound; c_lower stays a sampled lower bound
  }
  return out;
}

ModifiedBoundReport verifyModifiedBound(const StarAlgebra& a, const PositiveFunctional& omega,
                                        const AlgebraElement& b, const Derivation& delta,
                                        int samples, std::uint64_t seed) {
  return verifyModifiedBound(a, omega, b, delta, estimateBoundConstant(a, omega, delta),
                             samples, seed);
}

ModifiedBoundReport verifyModifiedBound(const StarAlgebra& a, const PositiveFunctional& omega,
                                        const AlgebraElement& b, const Derivation& delta,
                                        const BoundReport& bound, int samples,
                                        std::uint64_t seed) {
  const int d = a.dim();
  const double c_base = bound.has_upper ? bound.c_upper : bound.c_lower;

  const GnsTriple g = gnsConstruct(a, omega);
  const double pi_b_norm = operatorNorm(representOperator(g, b));
  const Vector delta_b = delta.map * b.coeffs;
  const double lambda_delta_b = (g.lambda * delta_b).norm();

  ModifiedBoundReport out;
  out.constant = c_base * pi_b_norm + lambda_delta_b;
  out.samples = samples;

  const PositiveFunctional omega_b = localModify(a, omega, b);
  const Matrix gram_b = a.gramMatrix(omega_b.values());
  const Matrix gram_bh = 0.5 * (gram_b + gram_b.adjoint());

  const Vector b_star = a.starCoeffs(b.coeffs);
  Rng rng(seed);
  double worst_identity = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector c = rng.gaussianVector(d);
    const Complex lhs_value = (omega_b.values().array() * (delta.map * c).array()).sum();
    const double q1 = std::max(0.0, std::real(inner(Vector(gram_bh * c), c)));
    const Vector sc = a.starCoeffs(c);
    const double q2 = std::max(0.0, std::real(inner(Vector(gram_bh * sc), sc)));
    const double rhs = out.constant * (std::sqrt(q1) + std::sqrt(q2));
    const double slack = std::abs(lhs_value) - rhs;
    out.worst_slack = std::max(out.worst_slack, slack);
    if (slack > 1e-9) ++out.violations;

    // b* delta(a) b = delta(b* a b) - delta(b*) a b - b* a delta(b)
    const Vector left =
        a.multiplyCoeffs(a.multiplyCoeffs(b_star, delta.map * c), b.coeffs);
    const Vector bab = a.multiplyCoeffs(a.multiplyCoeffs(b_star, c), b.coeffs);
    const Vector term1 = delta.map * bab;
    const Vector term2 =
        a.multiplyCoeffs(a.multiplyCoeffs(Vector(delta.map * b_star), c), b.coeffs);
    const Vector term3 =
        a.multiplyCoeffs(a.multiplyCoeffs(b_star, c), Vector(delta.map * b.coeffs));
    const double dev = (left - (term1 - term2 - term3)).cwiseAbs().maxCoeff();
    worst_identity = std::max(worst_identity, dev);
  }
  const double scale =
      std::max(1.0, b.coeffs.cwiseAbs().maxCoeff() * delta.map.norm());
  out.identity_residual = worst_identity;
  if (worst_identity > 1e-8 * scale)
    throw DerivationInconsistencyError(
        "verifyModifiedBound: Leibniz transfer identity fails, residual " +
        std::to_string(worst_identity));
  return out;
}

HamiltonianRelationReport relateEffectiveHamiltonians(const StarAlgebra& a,
                                                      const PositiveFunctional& omega,
                                                      const AlgebraElement& b,
                                                      const Derivation& delta) {
  const GnsTriple g = gnsConstruct(a, omega);
  const EffectiveHamiltonian base = solveSpatial(a, g, delta);
  if (!base.spatial)
    throw NumericalFailureError(
        "relateEffectiveHamiltonians: induced derivation of omega is not spatial");

  const IntertwinerBuild build = buildIntertwiner(a, g, b);
  const EffectiveHamiltonian modified = solveSpatial(a, build.gns_modified, delta);
  if (!modified.spatial)
    throw NumericalFailureError(
        "relateEffectiveHamiltonians: induced derivation of omega_b is not spatial");

  const Matrix h_sub =
      build.subspace.basis.adjoint() * base.matrix * build.subspace.basis;
  const Matrix transported =
      build.intertwiner.matrix * h_sub * build.intertwiner.matrix.adjoint();
  const Matrix difference = modified.matrix - transported;

  HamiltonianRelationReport out;
  out.base_residual = base.residual;
  out.modified_residual = modified.residual;
  out.delta_norm = difference.norm();
  for (int i = 0; i < a.dim(); ++i) {
    const Matrix& pi_b = build.gns_modified.rep[i];
    out.commutant_residual =
        std::max(out.commutant_residual, (difference * pi_b - pi_b * difference).norm());
  }
  return out;
}

Matrix heisenbergEvolve(const Matrix& h, const Matrix& x, double t) {
  if (h.rows() != x.rows() || h.cols() != x.cols())
    throw DimensionMismatch("heisenbergEvolve: dimension mismatch");
  return conjugateByExponential(h, x, t);
}

}  // namespace qstar
