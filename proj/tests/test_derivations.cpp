#include <doctest.h>

#include "qstar/commutant.hpp"
#include "qstar/derivations.hpp"
#include "qstar/errors.hpp"
#include "qstar/lattice.hpp"
#include "qstar/rng.hpp"

using namespace qstar;

namespace {

Matrix unit(int n, int r, int c) {
  Matrix e = Matrix::Zero(n, n);
  e(r, c) = 1.0;
  return e;
}

Matrix sigma3() {
  Matrix s(2, 2);
  s << 1, 0, 0, -1;
  return s;
}

Matrix sigma1() {
  Matrix s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}

/// M_2 + C embedded block-diagonally in M_3; omega below lives on the
/// M_2 block only, so e22 generates the kernel of its GNS representation.
StarAlgebra blockAlgebra() {
  std::vector<Matrix> basis;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) basis.push_back(unit(3, r, c));
  basis.push_back(unit(3, 2, 2));
  return StarAlgebra::fromBasis(basis);
}

}  // namespace

TEST_CASE("inner derivations") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);

  // central generator: zero derivation
  const Derivation central = innerDerivation(m2, m2.identity());
  CHECK(central.map.norm() < 1e-12);
  CHECK(central.verified_star);
  CHECK(central.verified_leibniz);

  // i[sigma3, e01] = 2i e01
  const Derivation d3 = innerDerivation(m2, m2.elementFromMatrix(sigma3()));
  const AlgebraElement e01 = m2.elementFromMatrix(unit(2, 0, 1));
  const AlgebraElement image = applyDerivation(m2, d3, e01);
  CHECK((image.matrix - Complex(0, 2) * unit(2, 0, 1)).norm() < 1e-12);

  // seeded Hermitian generators on M_3 satisfy Leibniz
  const StarAlgebra m3 = makeFullMatrixAlgebra(3);
  Rng rng(606);
  for (int t = 0; t < 6; ++t) {
    const Vector c = rng.gaussianVector(9);
    const AlgebraElement h = m3.element(0.5 * (c + m3.starCoeffs(c)));
    const Derivation d = innerDerivation(m3, h);
    const DerivationCheck check = checkDerivation(m3, d.map);
    CHECK(check.worst_leibniz < 1e-10);
    CHECK(check.worst_star < 1e-10);
  }

  CHECK_THROWS_AS(innerDerivation(m2, m2.elementFromMatrix(unit(2, 0, 1))), PositivityError);
}

TEST_CASE("derivation checker flags violations") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const DerivationCheck zero = checkDerivation(m2, Matrix::Zero(4, 4));
  CHECK(zero.star_ok);
  CHECK(zero.leibniz_ok);

  // delta(a) = a breaks Leibniz: delta(e e) = e but a delta(a) rule gives 2e
  const DerivationCheck identity_map = checkDerivation(m2, Matrix::Identity(4, 4));
  CHECK(identity_map.star_ok);
  CHECK_FALSE(identity_map.leibniz_ok);
  CHECK(identity_map.witness_i >= 0);
}

TEST_CASE("induced derivations and their certificates") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  Rng rng(3333);
  const PositiveFunctional faithful = stateFromDensityMatrix(m2, rng.densityMatrix(2));
  const GnsTriple g = gnsConstruct(m2, faithful);
  const Derivation d3 = innerDerivation(m2, m2.elementFromMatrix(sigma3()));
  const InducedDerivation induced = inducedDerivation(m2, g, d3);
  CHECK(induced.kernel_dim == 0);
  CHECK(induced.certificate == doctest::Approx(0.0));
  CHECK(induced.well_defined);

  // kernel case: omega supported on the M_2 block of M_2 + C
  const StarAlgebra block = blockAlgebra();
  Matrix rho = Matrix::Zero(3, 3);
  rho(0, 0) = rho(1, 1) = 0.5;
  const PositiveFunctional omega = stateFromDensityMatrix(block, rho);
  const GnsTriple gb = gnsConstruct(block, omega);
  CHECK(gb.hilbert_dim == 4);

  // inner derivations preserve the kernel ideal
  Matrix h_block = Matrix::Zero(3, 3);
  h_block(0, 1) = h_block(1, 0) = 1.0;
  const Derivation inner = innerDerivation(block, block.elementFromMatrix(h_block));
  const InducedDerivation ok = inducedDerivation(block, gb, inner);
  CHECK(ok.kernel_dim == 1);
  CHECK(ok.well_defined);

  // a map pushing e22 into the M_2 block cannot induce anything
  Matrix leak = Matrix::Zero(5, 5);
  leak(0, 4) = 1.0;  // delta(e22) = e00
  const Derivation broken{leak, false, false};
  try {
    inducedDerivation(block, gb, broken);
    FAIL("expected NotWellDefinedError");
  } catch (const NotWellDefinedError& e) {
    CHECK(e.certificate > 1e-6);
    REQUIRE(e.witness.size() == 5);
    CHECK(std::abs(e.witness[4]) > 0.9);  // the kernel is spanned by e22
  }

  // the zero derivation is always well defined
  const InducedDerivation trivial = inducedDerivation(block, gb, Derivation{Matrix::Zero(5, 5), true, true});
  CHECK(trivial.well_defined);
}

TEST_CASE("effective Hamiltonian for inner derivations") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));
  const GnsTriple g = gnsConstruct(m2, trace);

  // zero derivation: zero Hamiltonian under the minimal-norm gauge
  const EffectiveHamiltonian zero =
      solveSpatial(m2, g, Derivation{Matrix::Zero(4, 4), true, true});
  CHECK(zero.spatial);
  CHECK(zero.matrix.norm() < 1e-10);
  CHECK(zero.residual < 1e-12);

  const Derivation d3 = innerDerivation(m2, m2.elementFromMatrix(sigma3()));
  const EffectiveHamiltonian ham = solveSpatial(m2, g, d3);
  CHECK(ham.spatial);
  CHECK(ham.residual < 1e-10);
  CHECK((ham.matrix - ham.matrix.adjoint()).norm() < 1e-12);
  CHECK(std::abs(inner(Vector(ham.matrix * g.cyclic_vector), g.cyclic_vector)) < 1e-10);

  // H - pi(sigma3) lies in the weak commutant
  const Matrix shift = ham.matrix - representOperator(g, m2.elementFromMatrix(sigma3()));
  double residual = 0.0;
  for (int i = 0; i < 4; ++i)
    residual = std::max(residual, (shift * g.rep[i] - g.rep[i] * shift).norm());
  CHECK(residual < 1e-8);

  // gauge invariance: adding a Hermitian commutant element keeps the verdict
  const CommutantBasis comm = weakCommutant(g.rep);
  Matrix herm_comm;
  bool found = false;
  for (const Matrix& c : comm.basis) {
    const Matrix candidate = 0.5 * (c + c.adjoint());
    if (candidate.norm() > 1e-6 &&
        (candidate - Matrix::Identity(4, 4) * (candidate.trace() / 4.0)).norm() > 1e-6) {
      herm_comm = candidate;
      found = true;
      break;
    }
  }
  REQUIRE(found);
  const Matrix shifted = ham.matrix + herm_comm;
  double shifted_residual = 0.0;
  const Complex iunit(0, 1);
  const InducedDerivation ind = inducedDerivation(m2, g, d3);
  for (int i = 0; i < 4; ++i) {
    const Matrix comm_i = iunit * (shifted * g.rep[i] - g.rep[i] * shifted);
    shifted_residual = std::max(shifted_residual, (ind.delta_rep[i] - comm_i).norm());
  }
  CHECK(std::abs(shifted_residual - ham.residual) < 1e-10);
}

TEST_CASE("spatial solve on the three-site Heisenberg chain") {
  const LatticeSystem sys(3);
  const StarAlgebra& a = sys.algebra();
  Vector h_coeffs = Vector::Zero(a.dim());
  for (int p = 0; p + 1 < 3; ++p)
    for (int axis = 1; axis <= 3; ++axis)
      h_coeffs((axis << (2 * p)) | (axis << (2 * (p + 1)))) += 1.0;
  const AlgebraElement h = a.element(h_coeffs);

  Rng rng(2718);
  std::vector<Eigen::Vector3d> dirs;
  for (int p = 0; p < 3; ++p) dirs.push_back(rng.unitVector3());
  const PositiveFunctional omega = productState(dirs, sys);
  const GnsTriple g = gnsConstruct(a, omega);
  CHECK(g.hilbert_dim == 8);

  const Derivation delta = innerDerivation(a, h);
  const EffectiveHamiltonian ham = solveSpatial(a, g, delta);
  CHECK(ham.spatial);
  CHECK(ham.residual < 1e-8);
}

TEST_CASE("bound constants") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));

  const BoundReport zero =
      estimateBoundConstant(m2, trace, Derivation{Matrix::Zero(4, 4), true, true});
  CHECK(zero.c_lower == doctest::Approx(0.0));
  CHECK(zero.has_upper);
  CHECK(zero.c_upper == doctest::Approx(0.0));

  const Derivation d3 = innerDerivation(m2, m2.elementFromMatrix(sigma3()));
  const BoundReport b3 = estimateBoundConstant(m2, trace, d3);
  CHECK(b3.has_upper);
  CHECK(b3.c_lower <= b3.c_upper + 1e-9);
  CHECK(b3.kappa == doctest::Approx(1.0).epsilon(1e-9));

  Rng rng(62);
  for (const int n : {2, 3}) {
    const StarAlgebra a = makeFullMatrixAlgebra(n);
    for (int t = 0; t < 5; ++t) {
      const PositiveFunctional omega = stateFromDensityMatrix(a, rng.densityMatrix(n));
      const Vector c = rng.gaussianVector(a.dim());
      const Derivation d = innerDerivation(a, a.element(0.5 * (c + a.starCoeffs(c))));
      const BoundReport report = estimateBoundConstant(a, omega, d);
      CHECK(report.c_lower <= report.c_upper + 1e-9);
    }
  }

  CHECK_THROWS_AS(
      estimateBoundConstant(m2, PositiveFunctional(Vector::Zero(4), false), d3),
      DegenerateGeneratorError);
}

TEST_CASE("modified bound after local modification") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));
  const Derivation d1 = innerDerivation(m2, m2.elementFromMatrix(sigma1()));

  // b = e reduces to the base inequality
  const ModifiedBoundReport base =
      verifyModifiedBound(m2, trace, m2.identity(), d1, 100, 17);
  CHECK(base.violations == 0);
  CHECK(base.identity_residual < 1e-10);

  // the quoted example: b = e00 + e11/2
  const AlgebraElement b = m2.elementFromMatrix(unit(2, 0, 0) + 0.5 * unit(2, 1, 1));
  const ModifiedBoundReport mixed = verifyModifiedBound(m2, trace, b, d1, 200, 18);
  CHECK(mixed.violations == 0);

  // zero derivation: both sides vanish
  const ModifiedBoundReport zero =
      verifyModifiedBound(m2, trace, b, Derivation{Matrix::Zero(4, 4), true, true}, 50, 19);
  CHECK(zero.violations == 0);

  // a non-derivation breaks the transfer identity
  CHECK_THROWS_AS(
      verifyModifiedBound(m2, trace, b, Derivation{Matrix::Identity(4, 4), false, false}, 50, 20),
      DerivationInconsistencyError);
}

TEST_CASE("effective Hamiltonians of omega and omega_b agree modulo the commutant") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));
  const Derivation d3 = innerDerivation(m2, m2.elementFromMatrix(sigma3()));

  const HamiltonianRelationReport id_case =
      relateEffectiveHamiltonians(m2, trace, m2.identity(), d3);
  CHECK(id_case.commutant_residual < 1e-10);

  const HamiltonianRelationReport e00_case = relateEffectiveHamiltonians(
      m2, trace, m2.elementFromMatrix(unit(2, 0, 0)), d3);
  CHECK(e00_case.commutant_residual < 1e-9);

  Rng rng(8088);
  int ran = 0;
  for (const StarAlgebra& a : {makeFullMatrixAlgebra(2), StarAlgebra::pauliChain(2)}) {
    for (int t = 0; t < 8; ++t) {
      const PositiveFunctional omega =
          stateFromDensityMatrix(a, rng.densityMatrix(a.ambientDim()));
      const Vector hc = rng.gaussianVector(a.dim());
      const Derivation d = innerDerivation(a, a.element(0.5 * (hc + a.starCoeffs(hc))));
      AlgebraElement b = a.element(rng.gaussianVector(a.dim()));
      const PositiveFunctional mod = localModify(a, omega, b);
      if (std::real((mod.values().array() * a.identityCoeffs().array()).sum()) < 1e-3)
        continue;
      const HamiltonianRelationReport rel = relateEffectiveHamiltonians(a, omega, b, d);
      CHECK(rel.commutant_residual < 1e-8);
      ++ran;
    }
  }
  CHECK(ran >= 12);
}

TEST_CASE("Heisenberg evolution") {
  Rng rng(13);
  const int dim = 4;
  const Matrix raw = rng.gaussianMatrix(dim, dim);
  const Matrix h = 0.5 * (raw + raw.adjoint());
  const Matrix x = rng.gaussianMatrix(dim, dim);

  CHECK((heisenbergEvolve(h, x, 0.0) - x).norm() < 1e-12);

  // group law
  const Matrix ab = heisenbergEvolve(h, heisenbergEvolve(h, x, 0.4), 0.7);
  CHECK((ab - heisenbergEvolve(h, x, 1.1)).norm() < 1e-9);

  // spectrum is preserved under the unitary conjugation
  Eigen::ComplexEigenSolver<Matrix> before(x);
  Eigen::ComplexEigenSolver<Matrix> after(heisenbergEvolve(h, x, 0.9));
  Eigen::VectorXcd eb = before.eigenvalues(), ea = after.eigenvalues();
  std::sort(eb.data(), eb.data() + dim,
            [](Complex a, Complex b) { return std::real(a) < std::real(b); });
  std::sort(ea.data(), ea.data() + dim,
            [](Complex a, Complex b) { return std::real(a) < std::real(b); });
  CHECK((eb - ea).norm() < 1e-10);
  CHECK(heisenbergEvolve(h, x, 0.9).norm() == doctest::Approx(x.norm()));

  // central difference converges to i[h, .] at second order
  const Complex iu(0, 1);
  const Matrix commutator = iu * (h * x - x * h);
  const double dt = 1e-4;
  const Matrix diff =
      (heisenbergEvolve(h, x, dt) - heisenbergEvolve(h, x, -dt)) / (2 * dt);
  CHECK((diff - commutator).norm() < 1e-6);
}
