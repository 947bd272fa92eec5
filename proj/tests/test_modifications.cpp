#include <doctest.h>

#include "qstar/errors.hpp"
#include "qstar/modifications.hpp"
#include "qstar/rng.hpp"

using namespace qstar;

namespace {

Matrix unit(int n, int r, int c) {
  Matrix e = Matrix::Zero(n, n);
  e(r, c) = 1.0;
  return e;
}

StarAlgebra diagonalAlgebra() {
  // span{e00, e11} inside M_2: a proper, closed subalgebra
  return StarAlgebra::fromBasis({unit(2, 0, 0), unit(2, 1, 1)});
}

}  // namespace

TEST_CASE("localModify basics") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));

  const PositiveFunctional same = localModify(m2, trace, m2.identity());
  CHECK((same.values() - trace.values()).norm() < 1e-12);

  // sqrt(2) e00 turns the trace into the pure state x -> x00
  const AlgebraElement b = m2.elementFromMatrix(std::sqrt(2.0) * unit(2, 0, 0));
  const PositiveFunctional pure = localModify(m2, trace, b);
  CHECK(pure.isState());
  const PositiveFunctional expected = stateFromDensityMatrix(m2, unit(2, 0, 0));
  CHECK((pure.values() - expected.values()).norm() < 1e-12);

  // omega(b*b) = 0 yields the zero functional, not an error
  const PositiveFunctional from_pure = stateFromDensityMatrix(m2, unit(2, 0, 0));
  const AlgebraElement killer = m2.elementFromMatrix(unit(2, 1, 1));
  const PositiveFunctional zero = localModify(m2, from_pure, killer);
  CHECK(zero.values().norm() < 1e-12);
}

TEST_CASE("modification composes through the algebra product") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  Rng rng(404);
  const PositiveFunctional omega = stateFromDensityMatrix(m2, rng.densityMatrix(2));
  const AlgebraElement b = m2.element(rng.gaussianVector(4));
  const AlgebraElement bp = m2.element(rng.gaussianVector(4));
  // (omega_b)_{b'} = omega_{b' b}: the later modifier multiplies on the left
  const PositiveFunctional twice = localModify(m2, localModify(m2, omega, b), bp);
  const PositiveFunctional direct = localModify(m2, omega, m2.multiply(bp, b));
  CHECK((twice.values() - direct.values()).norm() < 1e-10);
}

TEST_CASE("localModify on a proper subalgebra") {
  const StarAlgebra diag = diagonalAlgebra();
  Vector values(2);
  values << 0.7, 0.3;
  const PositiveFunctional omega(values, true);
  Vector bc(2);
  bc << 2.0, 0.0;
  const PositiveFunctional modified = localModify(diag, omega, diag.element(bc));
  CHECK(std::abs(modified.values()(0) - 2.8) < 1e-12);  // |2|^2 * 0.7
  CHECK(std::abs(modified.values()(1)) < 1e-12);
}

TEST_CASE("sub-representation projection") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));
  const GnsTriple g = gnsConstruct(m2, trace);

  // b = e: ultra-cyclicity makes the subspace everything
  const SubRepSubspace full = subRepProjection(m2, g, m2.identity());
  CHECK(full.dim() == 4);
  CHECK((full.projection - Matrix::Identity(4, 4)).norm() < 1e-10);

  // b = e00: two-dimensional subspace spanned by lambda(e00), lambda(e10)
  const AlgebraElement e00 = m2.elementFromMatrix(unit(2, 0, 0));
  const SubRepSubspace half = subRepProjection(m2, g, e00);
  CHECK(half.dim() == 2);
  for (const AlgebraElement& gen :
       {e00, m2.elementFromMatrix(unit(2, 1, 0))}) {
    const Vector v = lambdaOf(g, gen);
    CHECK((half.projection * v - v).norm() < 1e-10);
  }
  CHECK((half.projection * half.projection - half.projection).norm() < 1e-10);
  CHECK((half.projection - half.projection.adjoint()).norm() < 1e-10);

  // quasi-invariance on seeded input
  Rng rng(99);
  const StarAlgebra m3 = makeFullMatrixAlgebra(3);
  const PositiveFunctional omega = stateFromDensityMatrix(m3, rng.densityMatrix(3));
  const GnsTriple g3 = gnsConstruct(m3, omega);
  const AlgebraElement b = m3.element(rng.gaussianVector(9));
  const SubRepSubspace sub = subRepProjection(m3, g3, b);
  double invariance = 0.0;
  for (int i = 0; i < 9; ++i) {
    const Matrix moved = g3.rep[i] * sub.basis;
    invariance = std::max(invariance, (moved - sub.projection * moved).norm());
  }
  CHECK(invariance < 1e-9);

  // degenerate generator
  const PositiveFunctional pure = stateFromDensityMatrix(m2, unit(2, 0, 0));
  const GnsTriple gp = gnsConstruct(m2, pure);
  CHECK_THROWS_AS(subRepProjection(m2, gp, m2.elementFromMatrix(unit(2, 1, 1))),
                  DegenerateGeneratorError);
}

TEST_CASE("intertwiner for b = e is the subspace basis itself") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));
  const IntertwinerBuild build = buildIntertwiner(m2, trace, m2.identity());
  CHECK((build.intertwiner.matrix - build.subspace.basis).norm() < 1e-9);
  CHECK(build.intertwiner.residual < 1e-10);
}

TEST_CASE("intertwiner for the trace and b = e00") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));
  const IntertwinerBuild build =
      buildIntertwiner(m2, trace, m2.elementFromMatrix(unit(2, 0, 0)));
  CHECK(build.subspace.dim() == 2);
  CHECK(build.gns_modified.hilbert_dim == 2);
  CHECK(build.intertwiner.residual < 1e-10);
  CHECK(build.intertwiner.unitarity_defect < 1e-12);

  // pi_omega restricted to the subspace is carried onto pi_{omega_b}
  for (int i = 0; i < 4; ++i) {
    const Matrix sub =
        build.subspace.basis.adjoint() * build.gns_base.rep[i] * build.subspace.basis;
    const Matrix carried = build.intertwiner.matrix.adjoint() *
                           build.gns_modified.rep[i] * build.intertwiner.matrix;
    CHECK((sub - carried).norm() < 1e-10);
  }
}

TEST_CASE("intertwiner property sweep") {
  Rng rng(7777);
  int trial = 0;
  for (const StarAlgebra& a :
       {makeFullMatrixAlgebra(2), makeFullMatrixAlgebra(3), StarAlgebra::pauliChain(2)}) {
    for (int k = 0; k < 10; ++k) {
      const int rank = rng.uniformInt(1, a.ambientDim());
      const PositiveFunctional omega =
          stateFromDensityMatrix(a, rng.densityMatrix(a.ambientDim(), rank));
      AlgebraElement b = a.element(rng.gaussianVector(a.dim()));
      const PositiveFunctional mod = localModify(a, omega, b);
      const double norm_sq =
          std::real((mod.values().array() * a.identityCoeffs().array()).sum());
      if (norm_sq < 1e-6) continue;
      const IntertwinerBuild build = buildIntertwiner(a, omega, b);
      CHECK(build.intertwiner.residual < 1e-8);
      CHECK(build.intertwiner.unitarity_defect < 1e-10);
      CHECK(build.subspace.dim() == build.gns_modified.hilbert_dim);

      // reconstruction commutes with modification
      const GnsTriple& gb = build.gns_modified;
      for (int i = 0; i < a.dim(); ++i) {
        const Complex lhs = inner(Vector(gb.rep[i] * gb.cyclic_vector), gb.cyclic_vector);
        CHECK(std::abs(lhs - build.modified.values()(i)) < 1e-9);
      }
      ++trial;
    }
  }
  CHECK(trial >= 25);
}

TEST_CASE("solveModifier closed form") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));

  // omega' = omega returns the principal choice b = e
  const AlgebraElement id_like = solveModifier(m2, trace, trace);
  CHECK((id_like.matrix - Matrix::Identity(2, 2)).norm() < 1e-9);

  // rho = I/2, rho' = e00: b = sqrt(2) e00
  const PositiveFunctional pure = stateFromDensityMatrix(m2, unit(2, 0, 0));
  const AlgebraElement b = solveModifier(m2, trace, pure);
  CHECK((b.matrix - std::sqrt(2.0) * unit(2, 0, 0)).norm() < 1e-9);

  // seeded faithful rho, arbitrary rho': verified against b rho b* = rho'
  const StarAlgebra m3 = makeFullMatrixAlgebra(3);
  Rng rng(31415);
  for (int t = 0; t < 10; ++t) {
    const Matrix g = rng.gaussianMatrix(3, 3);
    Matrix rho = g * g.adjoint() + 0.3 * Matrix::Identity(3, 3);
    rho /= rho.trace().real();
    const Matrix rho_prime = rng.densityMatrix(3, rng.uniformInt(1, 3));
    const PositiveFunctional source = stateFromDensityMatrix(m3, rho);
    const AlgebraElement solved =
        solveModifier(m3, source, stateFromDensityMatrix(m3, rho_prime));
    CHECK((solved.matrix * rho * solved.matrix.adjoint() - rho_prime).norm() < 1e-9);
    // the solved modifier also admits the intertwiner
    if (t < 3) {
      const IntertwinerBuild build = buildIntertwiner(m3, source, solved);
      CHECK(build.intertwiner.residual < 1e-8);
    }
  }

  // singular state refuses the closed form
  CHECK_THROWS_AS(solveModifier(m2, pure, trace), SingularStateError);

  // proper subalgebras are routed to the iterative search
  const StarAlgebra diag = diagonalAlgebra();
  Vector v(2);
  v << 0.5, 0.5;
  const PositiveFunctional omega_d(v, true);
  CHECK_THROWS_AS(solveModifier(diag, omega_d, omega_d), UnsupportedStructureError);
}

TEST_CASE("searchModifier handles singular states and subalgebras") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional pure = stateFromDensityMatrix(m2, unit(2, 0, 0));
  // reachable: rank-1 target of a rank-1 source
  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  const PositiveFunctional rotated = stateFromDensityMatrix(m2, plus);
  const ModifierSearchResult hit = searchModifier(m2, pure, rotated);
  CHECK(hit.reached_target);
  CHECK(hit.residual < 1e-9);

  // unreachable: rank grows
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));
  const ModifierSearchResult miss = searchModifier(m2, pure, trace);
  CHECK_FALSE(miss.reached_target);
  CHECK(miss.residual > 0.1);

  // subalgebra route
  const StarAlgebra diag = diagonalAlgebra();
  Vector v(2), w(2);
  v << 0.5, 0.5;
  w << 0.8, 0.2;
  const ModifierSearchResult sub =
      searchModifier(diag, PositiveFunctional(v, true), PositiveFunctional(w, true));
  CHECK(sub.reached_target);
}

TEST_CASE("regularized modifier sequences") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  Matrix faithful(2, 2);
  faithful << 0.6, 0, 0, 0.4;
  const PositiveFunctional omega = stateFromDensityMatrix(m2, faithful);

  // same functional: the regularization error |omega_{b_n} - omega| decays
  // like 2^-n / lambda_min and is below 1e-6 well before n = 25
  const ModifierSequence same = approximateModifierSequence(m2, omega, omega, 25);
  CHECK(same.support_compatible);
  CHECK(same.sup_errors(24) < 1e-6);
  CHECK(same.sup_errors(24) < same.sup_errors(4));

  // matching pure supports
  const PositiveFunctional pure = stateFromDensityMatrix(m2, unit(2, 0, 0));
  const ModifierSequence pp = approximateModifierSequence(m2, pure, pure, 25);
  CHECK(pp.support_compatible);
  CHECK(pp.sup_errors(24) < 1e-6);

  // support obstruction: omega_{b_n}(e11) stays zero while the target needs 1/2
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));
  const ModifierSequence blocked = approximateModifierSequence(m2, pure, trace, 25);
  CHECK_FALSE(blocked.support_compatible);
  CHECK(blocked.sup_errors(24) >= 0.5 - 1e-9);
  for (const AlgebraElement& b : blocked.steps) {
    const PositiveFunctional mod = localModify(m2, pure, b);
    CHECK(std::abs(mod.values()(3)) < 1e-12);  // omega_{b_n}(e11) = 0
  }

  // Cauchy increments and geometric decay in the compatible regime
  const ModifierSequence good = approximateModifierSequence(m2, omega, pure, 25);
  CHECK(good.support_compatible);
  CHECK(good.sup_errors(24) < 1e-6);
  CHECK(good.cauchy_increments(23) < good.cauchy_increments(10));

  CHECK_THROWS_AS(approximateModifierSequence(m2, omega, pure, 0), SizeError);
}

TEST_CASE("unitary equivalence report") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  std::vector<Matrix> rep;
  for (int i = 0; i < 4; ++i) rep.push_back(m2.basisMatrix(i));

  const EquivalenceReport same =
      verifyUnitaryEquivalence(rep, rep, Matrix::Identity(2, 2));
  CHECK(same.max_residual == doctest::Approx(0.0));
  CHECK(same.unitarity_defect == doctest::Approx(0.0));

  Rng rng(5150);
  const Matrix v = rng.unitary(2);
  std::vector<Matrix> conjugated;
  for (const Matrix& x : rep) conjugated.push_back(v * x * v.adjoint());
  const EquivalenceReport moved = verifyUnitaryEquivalence(rep, conjugated, v);
  CHECK(moved.max_residual < 1e-10);
  CHECK(moved.unitarity_defect < 1e-12);

  CHECK_THROWS_AS(verifyUnitaryEquivalence(rep, conjugated, Matrix::Identity(3, 3)),
                  DimensionMismatch);
}
