#include <benchmark/benchmark.h>

#include "qstar/commutant.hpp"
#include "qstar/derivations.hpp"
#include "qstar/lattice.hpp"
#include "qstar/rng.hpp"

using namespace qstar;

namespace {

StarAlgebra algebraFor(int64_t which) {
  switch (which) {
    case 0: return StarAlgebra::fullMatrixAlgebra(2);
    case 1: return StarAlgebra::fullMatrixAlgebra(3);
    default: return StarAlgebra::pauliChain(2);
  }
}

void BM_GnsConstruct(benchmark::State& state) {
  const StarAlgebra a = algebraFor(state.range(0));
  Rng rng(17);
  const PositiveFunctional omega =
      stateFromDensityMatrix(a, rng.densityMatrix(a.ambientDim()));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gnsConstruct(a, omega));
  }
}
BENCHMARK(BM_GnsConstruct)->Arg(0)->Arg(1)->Arg(2);

void BM_BuildIntertwiner(benchmark::State& state) {
  const StarAlgebra a = algebraFor(state.range(0));
  Rng rng(18);
  const PositiveFunctional omega =
      stateFromDensityMatrix(a, rng.densityMatrix(a.ambientDim()));
  const GnsTriple g = gnsConstruct(a, omega);
  const AlgebraElement b = a.element(rng.gaussianVector(a.dim()));
  for (auto _ : state) {
    benchmark::DoNotOptimize(buildIntertwiner(a, g, b));
  }
}
BENCHMARK(BM_BuildIntertwiner)->Arg(0)->Arg(2);

void BM_SolveSpatial(benchmark::State& state) {
  const StarAlgebra a = algebraFor(state.range(0));
  Rng rng(19);
  const Matrix gm = rng.gaussianMatrix(a.ambientDim(), a.ambientDim());
  Matrix rho = gm * gm.adjoint() + 0.2 * Matrix::Identity(a.ambientDim(), a.ambientDim());
  rho /= rho.trace().real();
  const PositiveFunctional omega = stateFromDensityMatrix(a, rho);
  const GnsTriple g = gnsConstruct(a, omega);
  const Vector hc = rng.gaussianVector(a.dim());
  const Derivation delta = innerDerivation(a, a.element(0.5 * (hc + a.starCoeffs(hc))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solveSpatial(a, g, delta));
  }
}
BENCHMARK(BM_SolveSpatial)->Arg(0)->Arg(2);

void BM_WeakCommutant(benchmark::State& state) {
  const StarAlgebra a = algebraFor(state.range(0));
  const int n = a.ambientDim();
  const PositiveFunctional trace =
      stateFromDensityMatrix(a, Matrix::Identity(n, n) / static_cast<double>(n));
  const GnsTriple g = gnsConstruct(a, trace);
  for (auto _ : state) {
    benchmark::DoNotOptimize(weakCommutant(g.rep));
  }
}
BENCHMARK(BM_WeakCommutant)->Arg(0)->Arg(2);

void BM_HeisenbergEvolve(benchmark::State& state) {
  const int dim = 1 << state.range(0);
  Rng rng(20);
  const Matrix raw = rng.gaussianMatrix(dim, dim);
  const Matrix h = 0.5 * (raw + raw.adjoint());
  const Matrix x = rng.gaussianMatrix(dim, dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(heisenbergEvolve(h, x, 0.37));
  }
}
BENCHMARK(BM_HeisenbergEvolve)->Arg(3)->Arg(5);

void BM_Check2LM(benchmark::State& state) {
  const LatticeSystem sys(static_cast<int>(state.range(0)));
  Rng rng(21);
  std::vector<Eigen::Vector3d> dirs;
  for (int p = 0; p < sys.nSites(); ++p) dirs.push_back(rng.unitVector3());
  const PositiveFunctional omega = productState(dirs, sys);
  const StarAlgebra& a = sys.algebra();
  Vector local = rng.gaussianVector(4);
  const Vector full = sys.embedCoeffs(local, Region::of({0}), sys.fullRegion());
  AlgebraElement b{full, sys.denseLocalMatrix(full, sys.fullRegion())};
  PositiveFunctional modified = localModify(a, omega, b);
  const double norm_sq =
      std::real((modified.values().array() * a.identityCoeffs().array()).sum());
  modified = PositiveFunctional::fromValues(a, modified.values() / norm_sq);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check2LM(sys, omega, modified, 1e-6));
  }
}
BENCHMARK(BM_Check2LM)->Arg(3)->Arg(4);

void BM_ProductStateValues(benchmark::State& state) {
  const LatticeSystem sys(static_cast<int>(state.range(0)));
  Rng rng(22);
  std::vector<Eigen::Matrix2cd> sites;
  for (int p = 0; p < sys.nSites(); ++p)
    sites.push_back(0.5 * (Eigen::Matrix2cd::Identity() + sigmaDotN(rng.unitVector3())));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sys.productStateValues(sites));
  }
}
BENCHMARK(BM_ProductStateValues)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
