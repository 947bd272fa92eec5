#include "qstar/commutant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qstar/errors.hpp"

namespace qstar {

namespace {

/// Frobenius distance of m to the span of an orthonormal family.
double distanceToSpan(const std::vector<Matrix>& ortho, const Matrix& m) {
  Matrix residual = m;
  for (const Matrix& c : ortho) {
    const Complex coeff = vectorize(c).dot(vectorize(m));  // <c, m>_F
    residual -= coeff * c;
  }
  return residual.norm();
}

}  // namespace

CommutantBasis weakCommutant(const std::vector<Matrix>& rep, double tol) {
  if (rep.empty()) throw DimensionMismatch("weakCommutant: empty representation list");
  const int m = static_cast<int>(rep.front().rows());
  const int d = static_cast<int>(rep.size());

  Matrix stacked(static_cast<Eigen::Index>(d) * m * m, m * m);
  for (int i = 0; i < d; ++i) {
    if (rep[i].rows() != m || rep[i].cols() != m)
      throw DimensionMismatch("weakCommutant: representation matrices differ in shape");
    // vec(C pi - pi C) = (pi^T (x) I - I (x) pi) vec(C)
    Matrix block = Matrix::Zero(m * m, m * m);
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q) {
        // (pi^T (x) I): entry at (q*m + r, p*m + r) += pi(p, q)
        for (int r = 0; r < m; ++r) block(q * m + r, p * m + r) += rep[i](p, q);
        // (I (x) pi): entry at (r*m + p, r*m + q) -= pi(p, q)
        for (int r = 0; r < m; ++r) block(r * m + p, r * m + q) -= rep[i](p, q);
      }
    stacked.middleRows(static_cast<Eigen::Index>(i) * m * m, m * m) = block;
  }

  const Matrix kernel = nullSpaceBasis(stacked, tol);
  CommutantBasis out;
  out.dimension = static_cast<int>(kernel.cols());
  out.basis.reserve(out.dimension);
  for (int k = 0; k < out.dimension; ++k)
    out.basis.push_back(unvectorize(kernel.col(k), m, m));

  for (const Matrix& c : out.basis)
    for (const Matrix& pi : rep)
      out.worst_commutation = std::max(out.worst_commutation, (c * pi - pi * c).norm());

  out.is_star_closed = true;
  out.is_algebra_closed = true;
  for (int i = 0; i < out.dimension; ++i) {
    const double star_res = distanceToSpan(out.basis, out.basis[i].adjoint());
    if (star_res > 1e-9 * std::max(1.0, out.basis[i].norm())) out.is_star_closed = false;
    for (int j = 0; j < out.dimension; ++j) {
      const Matrix prod = out.basis[i] * out.basis[j];
      if (distanceToSpan(out.basis, prod) > 1e-9 * std::max(1.0, prod.norm()))
        out.is_algebra_closed = false;
    }
  }
  return out;
}

CommutantEqualityReport checkCommutantEquality(const std::vector<Matrix>& rep_full,
                                               const std::vector<Matrix>& rep_generating) {
  if (rep_full.empty() || rep_generating.empty())
    throw DimensionMismatch("checkCommutantEquality: empty representation list");
  const int m = static_cast<int>(rep_full.front().rows());

  // Iterated-products span of {I, generators, adjoints}.
  std::vector<Matrix> multipliers = rep_generating;
  for (const Matrix& g : rep_generating) multipliers.push_back(g.adjoint());

  Matrix span_cols(m * m, 1 + multipliers.size());
  span_cols.col(0) = vectorize(Matrix::Identity(m, m));
  for (size_t i = 0; i < multipliers.size(); ++i)
    span_cols.col(1 + i) = vectorize(multipliers[i]);
  Matrix span = orthonormalRange(span_cols, 1e-10);
  while (true) {
    const int before = static_cast<int>(span.cols());
    Matrix grown(m * m, before * (1 + multipliers.size()));
    grown.leftCols(before) = span;
    Eigen::Index col = before;
    for (const Matrix& g : multipliers)
      for (int k = 0; k < before; ++k)
        grown.col(col++) = vectorize(g * unvectorize(span.col(k), m, m));
    span = orthonormalRange(grown, 1e-10);
    if (static_cast<int>(span.cols()) == before) break;
  }

  CommutantEqualityReport out;
  out.generated_dim = static_cast<int>(span.cols());

  // The subset generates iff the span of rep_full sits inside the generated span.
  double generation_defect = 0.0;
  for (const Matrix& x : rep_full) {
    const Vector v = vectorize(x);
    const Vector proj = span * (span.adjoint() * v);
    generation_defect =
        std::max(generation_defect, (v - proj).norm() / std::max(1.0, v.norm()));
  }
  if (generation_defect > 1e-9)
    throw NotGeneratingError(
        "checkCommutantEquality: subset does not generate the full algebra, defect " +
        std::to_string(generation_defect));

  const CommutantBasis full = weakCommutant(rep_full);
  const CommutantBasis generating = weakCommutant(rep_generating);
  out.dim_full = full.dimension;
  out.dim_generating = generating.dimension;

  double mutual = 0.0;
  for (const Matrix& c : full.basis) mutual = std::max(mutual, distanceToSpan(generating.basis, c));
  for (const Matrix& c : generating.basis) mutual = std::max(mutual, distanceToSpan(full.basis, c));
  out.mutual_residual = mutual;
  out.equal = full.dimension == generating.dimension && mutual < 1e-9;
  return out;
}

ProjectionMembership projectionInCommutant(const Matrix& p, const std::vector<Matrix>& rep,
                                           double tol) {
  const double scale = std::max(1.0, p.norm());
  if ((p * p - p).norm() > 1e-10 * scale || (p - p.adjoint()).norm() > 1e-10 * scale)
    throw PositivityError("projectionInCommutant: input is not a Hermitian idempotent");
  ProjectionMembership out;
  for (const Matrix& pi : rep)
    out.residual = std::max(out.residual, (p * pi - pi * p).norm());
  out.in_commutant = out.residual < tol;
  return out;
}

DirectSumReport decomposeDirectSum(const StarAlgebra& a, const PositiveFunctional& omega,
                                   const std::vector<AlgebraElement>& generators) {
  const GnsTriple g = gnsConstruct(a, omega);
  const int m = g.hilbert_dim;

  std::vector<IntertwinerBuild> builds;
  builds.reserve(generators.size());
  for (const AlgebraElement& b : generators)
    builds.push_back(buildIntertwiner(a, g, b, std::numeric_limits<double>::infinity()));

  DirectSumReport out;
  for (size_t i = 0; i < builds.size(); ++i)
    for (size_t j = i + 1; j < builds.size(); ++j)
      out.orthogonality_max =
          std::max(out.orthogonality_max,
                   (builds[i].subspace.projection * builds[j].subspace.projection).norm());

  Matrix sum = Matrix::Zero(m, m);
  int total = 0;
  for (const auto& b : builds) {
    sum += b.subspace.projection;
    total += b.subspace.dim();
  }
  out.completeness_residual = (sum - Matrix::Identity(m, m)).norm();
  out.orthogonal = out.orthogonality_max < 1e-9;
  out.complete = out.completeness_residual < 1e-9;

  // V columns: subspace basis transported to the block coordinates, so that
  // V^dagger pi(x) V is block diagonal with blocks pi_{omega_b}(x).
  out.block_unitary.resize(m, total);
  int offset = 0;
  for (const auto& b : builds) {
    out.block_unitary.middleCols(offset, b.subspace.dim()) =
        b.subspace.basis * b.intertwiner.matrix.adjoint();
    offset += b.subspace.dim();
  }

  out.equivalent = true;
  out.blocks.resize(builds.size());
  for (size_t k = 0; k < builds.size(); ++k) {
    out.blocks[k].dim = builds[k].subspace.dim();
    out.blocks[k].equivalence_residual = 0.0;
  }
  for (int i = 0; i < a.dim(); ++i) {
    const Matrix conjugated =
        out.block_unitary.adjoint() * g.rep[i] * out.block_unitary;
    int row = 0;
    for (size_t k = 0; k < builds.size(); ++k) {
      const int r = builds[k].subspace.dim();
      Matrix expected = builds[k].gns_modified.rep[i];
      Matrix block_row = conjugated.middleRows(row, r);
      block_row.middleCols(row, r) -= expected;
      out.blocks[k].equivalence_residual =
          std::max(out.blocks[k].equivalence_residual, block_row.norm());
      row += r;
    }
  }
  for (const auto& block : out.blocks)
    if (!(block.equivalence_residual < 1e-8)) out.equivalent = false;
  return out;
}

SelfAdjointElementReport selfAdjointElementCheck(const StarAlgebra& a,
                                                 const PositiveFunctional& omega,
                                                 const AlgebraElement& b) {
  const GnsTriple g = gnsConstruct(a, omega);
  const SubRepSubspace sub = subRepProjection(a, g, b);
  SelfAdjointElementReport out;
  const Matrix& p = sub.projection;
  out.projection_defect = std::max((p * p - p).norm(), (p - p.adjoint()).norm());
  for (int i = 0; i < a.dim(); ++i) {
    const Matrix on_range = g.rep[i] * sub.basis;
    out.invariance_residual =
        std::max(out.invariance_residual, (on_range - p * on_range).norm());
    const Matrix restricted = sub.basis.adjoint() * g.rep[i] * sub.basis;
    const Matrix compressed = sub.basis.adjoint() * (p * g.rep[i] * p) * sub.basis;
    out.compression_residual =
        std::max(out.compression_residual, (restricted - compressed).norm());
  }
  return out;
}

}  // namespace qstar
