#include "qstar/experiments.hpp"

#include <json.hpp>

#include <atomic>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "pauli_detail.hpp"
#include "qstar/errors.hpp"
#include "qstar/io.hpp"
#include "qstar/rng.hpp"

namespace qstar {

using nlohmann::json;

namespace {

template <typename Fn>
void parallelFor(int count, int jobs, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < count) fn(i);
    });
  for (std::thread& t : workers) t.join();
}

Matrix randomDensity(Rng& rng, int n, bool allow_rank_deficient) {
  int rank = n;
  if (allow_rank_deficient && n > 1 && rng.uniform() < 0.3)
    rank = rng.uniformInt(1, n - 1);
  return rng.densityMatrix(n, rank);
}

Matrix randomFaithfulDensity(Rng& rng, int n) {
  const Matrix g = rng.gaussianMatrix(n, n);
  Matrix rho = g * g.adjoint() + 0.1 * static_cast<double>(n) * Matrix::Identity(n, n);
  rho /= rho.trace().real();
  return rho;
}

AlgebraElement randomHermitianElement(const StarAlgebra& a, Rng& rng) {
  const Vector c = rng.gaussianVector(a.dim());
  return a.element(0.5 * (c + a.starCoeffs(c)));
}

/// Random b with omega(b*b) bounded away from the degenerate regime.
AlgebraElement randomModifier(const StarAlgebra& a, const PositiveFunctional& omega, Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const Vector c = rng.gaussianVector(a.dim());
    const AlgebraElement b = a.element(c);
    const PositiveFunctional shifted = localModify(a, omega, b);
    const Complex norm_sq =
        (shifted.values().array() * a.identityCoeffs().array()).sum();
    if (std::real(norm_sq) > 1e-3) return b;
  }
  return a.identity();
}

}  // namespace

namespace sweeps {

StarAlgebra algebraByName(const std::string& name) {
  if (name == "m2") return StarAlgebra::fullMatrixAlgebra(2);
  if (name == "m3") return StarAlgebra::fullMatrixAlgebra(3);
  if (name == "m4") return StarAlgebra::fullMatrixAlgebra(4);
  if (name == "m2xm2") return StarAlgebra::pauliChain(2);
  if (name.rfind("pauli", 0) == 0 && name.size() == 6 && std::isdigit(name[5]))
    return StarAlgebra::pauliChain(name[5] - '0');
  throw ConfigError("unknown algebra name '" + name + "'");
}

GnsSweepResult gnsSweep(const std::vector<std::string>& algebras, int trials,
                        std::uint64_t seed, int jobs) {
  GnsSweepResult out;
  for (size_t ai = 0; ai < algebras.size(); ++ai) {
    const StarAlgebra a = algebraByName(algebras[ai]);
    std::vector<double> residuals(trials, 0.0);
    std::vector<int> rank_ok(trials, 1);
    parallelFor(trials, jobs, [&](int t) {
      Rng rng(Rng::derive(seed, ai * static_cast<std::uint64_t>(trials) + t));
      const PositiveFunctional omega =
          stateFromDensityMatrix(a, randomDensity(rng, a.ambientDim(), true));
      const GnsTriple g = gnsConstruct(a, omega);
      double res = 0.0;
      for (int i = 0; i < a.dim(); ++i) {
        const Complex rebuilt =
            inner(Vector(g.rep[i] * g.cyclic_vector), g.cyclic_vector);
        res = std::max(res, std::abs(rebuilt - omega.values()(i)));
      }
      residuals[t] = res;
      rank_ok[t] = numericalRank(g.lambda, 1e-10) == g.hilbert_dim ? 1 : 0;
    });
    for (int t = 0; t < trials; ++t) {
      out.max_reconstruction_residual =
          std::max(out.max_reconstruction_residual, residuals[t]);
      if (!rank_ok[t]) ++out.rank_failures;
    }
    out.trials += trials;
  }
  return out;
}

Prop6ForwardResult prop6ForwardSweep(const std::vector<std::string>& algebras, int trials,
                                     std::uint64_t seed, int jobs) {
  Prop6ForwardResult out;
  for (size_t ai = 0; ai < algebras.size(); ++ai) {
    const StarAlgebra a = algebraByName(algebras[ai]);
    std::vector<double> defects(trials, 0.0), residuals(trials, 0.0);
    std::vector<int> failed(trials, 0);
    parallelFor(trials, jobs, [&](int t) {
      Rng rng(Rng::derive(seed, 1000 + ai * static_cast<std::uint64_t>(trials) + t));
      const PositiveFunctional omega =
          stateFromDensityMatrix(a, randomDensity(rng, a.ambientDim(), true));
      const AlgebraElement b = randomModifier(a, omega, rng);
      try {
        const IntertwinerBuild build = buildIntertwiner(a, omega, b);
        defects[t] = build.intertwiner.unitarity_defect;
        residuals[t] = build.intertwiner.residual;
      } catch (const Error&) {
        failed[t] = 1;
      }
    });
    for (int t = 0; t < trials; ++t) {
      out.max_unitarity_defect = std::max(out.max_unitarity_defect, defects[t]);
      out.max_intertwining_residual = std::max(out.max_intertwining_residual, residuals[t]);
      out.failures += failed[t];
    }
    out.trials += trials;
  }
  return out;
}

Prop6ConverseResult prop6ConverseSweep(const std::vector<std::string>& algebras, int trials,
                                       std::uint64_t seed, int jobs) {
  Prop6ConverseResult out;
  for (size_t ai = 0; ai < algebras.size(); ++ai) {
    const StarAlgebra a = algebraByName(algebras[ai]);
    std::vector<double> deviations(trials, 0.0);
    std::vector<int> failed(trials, 0);
    parallelFor(trials, jobs, [&](int t) {
      Rng rng(Rng::derive(seed, 2000 + ai * static_cast<std::uint64_t>(trials) + t));
      const PositiveFunctional omega =
          stateFromDensityMatrix(a, randomFaithfulDensity(rng, a.ambientDim()));
      const PositiveFunctional target =
          stateFromDensityMatrix(a, randomDensity(rng, a.ambientDim(), true));
      try {
        const AlgebraElement b = solveModifier(a, omega, target);
        const PositiveFunctional modified = localModify(a, omega, b);
        deviations[t] = (modified.values() - target.values()).cwiseAbs().maxCoeff();
      } catch (const Error&) {
        failed[t] = 1;
      }
    });
    for (int t = 0; t < trials; ++t) {
      out.max_deviation = std::max(out.max_deviation, deviations[t]);
      out.failures += failed[t];
    }
    out.trials += trials;
  }
  return out;
}

Prop7Result prop7Curated(int steps) {
  const StarAlgebra a = StarAlgebra::fullMatrixAlgebra(2);
  Matrix e00 = Matrix::Zero(2, 2), e11 = Matrix::Zero(2, 2);
  e00(0, 0) = 1.0;
  e11(1, 1) = 1.0;
  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;  // |+><+|
  Matrix mixed64(2, 2), mixed37(2, 2);
  mixed64 << 0.6, 0, 0, 0.4;
  mixed37 << 0.3, 0, 0, 0.7;
  const Matrix half = 0.5 * Matrix::Identity(2, 2);

  struct Config {
    const char* name;
    Matrix rho, rho_prime;
    bool expected;
  };
  const std::vector<Config> configs = {
      {"faithful-to-faithful", mixed64, mixed37, true},
      {"faithful-to-pure", mixed64, e00, true},
      {"pure-same-support", e00, e00, true},
      {"pure-to-mixed", e00, half, false},
      {"pure-orthogonal", e00, e11, false},
      {"pure-to-rotated", e11, plus, false},
  };

  Prop7Result out;
  for (const Config& cfg : configs) {
    const PositiveFunctional omega = stateFromDensityMatrix(a, cfg.rho);
    const PositiveFunctional target = stateFromDensityMatrix(a, cfg.rho_prime);
    const ModifierSequence seq = approximateModifierSequence(a, omega, target, steps);
    Prop7Row row;
    row.name = cfg.name;
    row.expected_convergent = cfg.expected;
    row.final_error = seq.sup_errors(seq.sup_errors.size() - 1);
    row.converged = seq.converged(1e-6);
    row.support_compatible = seq.support_compatible;
    out.rows.push_back(std::move(row));
  }
  return out;
}

SpatialSweepResult spatialSweep(const std::string& algebra, int trials, std::uint64_t seed,
                                int bound_samples, int jobs) {
  const StarAlgebra a = algebraByName(algebra);
  SpatialSweepResult out;
  out.trials = trials;
  std::vector<double> residuals(trials, 0.0), recovery(trials, 0.0), identity(trials, 0.0);
  std::vector<int> failed(trials, 0), sandwich(trials, 0), bound_bad(trials, 0);
  parallelFor(trials, jobs, [&](int t) {
    Rng rng(Rng::derive(seed, 3000 + t));
    const PositiveFunctional omega =
        stateFromDensityMatrix(a, randomFaithfulDensity(rng, a.ambientDim()));
    const AlgebraElement h = randomHermitianElement(a, rng);
    try {
      const Derivation delta = innerDerivation(a, h);
      const GnsTriple g = gnsConstruct(a, omega);
      const EffectiveHamiltonian ham = solveSpatial(a, g, delta);
      if (!ham.spatial) {
        failed[t] = 1;
        return;
      }
      residuals[t] = ham.residual;
      const Matrix shift = ham.matrix - representOperator(g, h);
      for (int i = 0; i < a.dim(); ++i)
        recovery[t] = std::max(recovery[t],
                               (shift * g.rep[i] - g.rep[i] * shift).norm());
      const BoundReport bound = estimateBoundConstant(a, omega, delta);
      if (bound.has_upper && bound.c_lower > bound.c_upper + 1e-9) sandwich[t] = 1;
      const AlgebraElement b = randomModifier(a, omega, rng);
      const ModifiedBoundReport mb = verifyModifiedBound(
          a, omega, b, delta, bound, bound_samples, Rng::derive(seed, 4000 + t));
      bound_bad[t] = mb.violations;
      identity[t] = mb.identity_residual;
    } catch (const Error&) {
      failed[t] = 1;
    }
  });
  for (int t = 0; t < trials; ++t) {
    out.failures += failed[t];
    out.max_residual = std::max(out.max_residual, residuals[t]);
    out.max_recovery_residual = std::max(out.max_recovery_residual, recovery[t]);
    out.sandwich_violations += sandwich[t];
    out.bound_violations += bound_bad[t];
    out.max_identity_residual = std::max(out.max_identity_residual, identity[t]);
  }
  return out;
}

HamiltonianRelationResult hamiltonianRelationSweep(const std::string& algebra, int trials,
                                                   std::uint64_t seed, int jobs) {
  const StarAlgebra a = algebraByName(algebra);
  HamiltonianRelationResult out;
  out.trials = trials;
  std::vector<double> residuals(trials, 0.0);
  std::vector<int> failed(trials, 0);
  parallelFor(trials, jobs, [&](int t) {
    Rng rng(Rng::derive(seed, 5000 + t));
    const PositiveFunctional omega =
        stateFromDensityMatrix(a, randomFaithfulDensity(rng, a.ambientDim()));
    const AlgebraElement h = randomHermitianElement(a, rng);
    try {
      const Derivation delta = innerDerivation(a, h);
      const AlgebraElement b = randomModifier(a, omega, rng);
      const HamiltonianRelationReport report =
          relateEffectiveHamiltonians(a, omega, b, delta);
      residuals[t] = report.commutant_residual;
    } catch (const Error&) {
      failed[t] = 1;
    }
  });
  for (int t = 0; t < trials; ++t) {
    out.failures += failed[t];
    out.max_commutant_residual = std::max(out.max_commutant_residual, residuals[t]);
  }
  return out;
}

CommutantChecksResult commutantChecks() {
  CommutantChecksResult out;

  // GNS of the normalized trace on M_2: the left regular representation,
  // commutant dimension 4.
  const StarAlgebra m2 = StarAlgebra::fullMatrixAlgebra(2);
  const PositiveFunctional trace2 =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));
  const GnsTriple g_trace = gnsConstruct(m2, trace2);
  out.trace_gns_dim = weakCommutant(g_trace.rep).dimension;

  // Defining representation: irreducible, scalars only.
  out.defining_dim = weakCommutant(m2.basis()).dimension;

  // Commutant equality on the quasi-local filtration: single-site Pauli
  // generators against the full tensor algebra. N = 2 runs on the trace
  // GNS (left regular), N = 3 on a product-state GNS.
  {
    const StarAlgebra chain = StarAlgebra::pauliChain(2);
    const PositiveFunctional trace4 =
        stateFromDensityMatrix(chain, 0.25 * Matrix::Identity(4, 4));
    const GnsTriple g = gnsConstruct(chain, trace4);
    std::vector<Matrix> generating;
    for (int p = 0; p < 2; ++p)
      for (int axis = 1; axis <= 3; ++axis) generating.push_back(g.rep[axis << (2 * p)]);
    out.prop11_n2 = checkCommutantEquality(g.rep, generating).equal;
  }
  {
    const LatticeSystem sys(3);
    std::vector<Eigen::Vector3d> dirs(3, Eigen::Vector3d(0, 0, 1));
    const PositiveFunctional omega = productState(dirs, sys);
    const GnsTriple g = gnsConstruct(sys.algebra(), omega);
    std::vector<Matrix> generating;
    for (int p = 0; p < 3; ++p)
      for (int axis = 1; axis <= 3; ++axis) generating.push_back(g.rep[axis << (2 * p)]);
    out.prop11_n3 = checkCommutantEquality(g.rep, generating).equal;
  }

  // Direct-sum decomposition of M_2 with generators sqrt(2) e00, sqrt(2) e01.
  {
    const double root2 = std::sqrt(2.0);
    Vector b1 = Vector::Zero(4), b2 = Vector::Zero(4);
    b1(0) = root2;  // e00
    b2(1) = root2;  // e01
    const DirectSumReport report = decomposeDirectSum(
        m2, trace2, {m2.element(b1), m2.element(b2)});
    out.decomposition_orthogonality = report.orthogonality_max;
    out.decomposition_completeness = report.completeness_residual;
    for (const DirectSumBlock& block : report.blocks) {
      out.block_dims.push_back(block.dim);
      out.decomposition_block_residual =
          std::max(out.decomposition_block_residual, block.equivalence_residual);
    }
  }
  return out;
}

LatticeChecksResult latticeChecks(std::uint64_t seed, int directions, int demo_samples,
                                  int symmetry_trials) {
  LatticeChecksResult out;
  Rng rng(seed);

  for (int t = 0; t < directions; ++t) {
    const Eigen::Vector3d n = rng.unitVector3();
    const Eigen::Matrix2cd sn = sigmaDotN(n);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(sn);
    out.max_spectrum_deviation =
        std::max({out.max_spectrum_deviation, std::abs(es.eigenvalues()(0) + 1.0),
                  std::abs(es.eigenvalues()(1) - 1.0)});
    const Frame frame = Frame::complete(n);
    for (int m = 0; m < 2; ++m) {
      const Eigen::Vector2cd v = flippedVector(m, frame);
      const double sign = m == 0 ? 1.0 : -1.0;
      out.max_eigenrelation_residual =
          std::max(out.max_eigenrelation_residual, (sn * v - sign * v).norm());
    }
  }

  {
    const LatticeSystem sys(4);
    const DemoReport demo = demoSection3(sys, Region::of({2, 3}), Region::of({0, 1}),
                                         Rng::derive(seed, 11), demo_samples);
    out.demo_equality_deviation = demo.max_equality_deviation;
    out.demo_region_ok = demo.two_lm.success && demo.two_lm.region == Region::of({0, 1});
  }

  {
    const LatticeSystem sys(4);
    Vector psi = Vector::Zero(16);
    psi(0) = 1.0 / std::sqrt(2.0);
    psi(15) = 1.0 / std::sqrt(2.0);
    const PositiveFunctional ghz = stateVectorFunctional(psi, sys);
    const AlgebraElement b = sys.pauliOperator(3, 0);
    SweepOptions opts;
    opts.seed = Rng::derive(seed, 12);
    const ClusteringReport ac = checkAlmostClustering(sys, ghz, b, 0.1, opts);
    out.ghz_ac_failed = !ac.success;
    out.ghz_witness = ac.best_estimate;
  }

  {
    // Symmetry of the 2LM relation on locally modified product states:
    // both orders must return the same verdict and the same minimal region.
    const LatticeSystem sys(3);
    const StarAlgebra& a = sys.algebra();
    out.symmetry_trials = symmetry_trials;
    for (int t = 0; t < symmetry_trials; ++t) {
      Rng trial_rng(Rng::derive(seed, 100 + t));
      std::vector<Eigen::Vector3d> dirs;
      for (int p = 0; p < 3; ++p) dirs.push_back(trial_rng.unitVector3());
      const PositiveFunctional omega = productState(dirs, sys);

      std::vector<int> sites = {trial_rng.uniformInt(0, 2)};
      if (trial_rng.uniform() < 0.5) sites.push_back(trial_rng.uniformInt(0, 2));
      const Region support = Region::of(sites);
      const int local_words = 1 << (2 * support.size());
      const Vector local = trial_rng.gaussianVector(local_words);
      const Vector full = sys.embedCoeffs(local, support, sys.fullRegion());
      const AlgebraElement b{full, sys.denseLocalMatrix(full, sys.fullRegion())};
      PositiveFunctional modified = localModify(a, omega, b);
      const double norm_sq = std::real(
          (modified.values().array() * a.identityCoeffs().array()).sum());
      if (norm_sq < 1e-6) continue;
      modified = PositiveFunctional::fromValues(a, modified.values() / norm_sq);

      const double eps = 0.02 + 0.3 * trial_rng.uniform();
      SweepOptions opts;
      opts.seed = Rng::derive(seed, 200 + t);
      const ClusteringReport forward = check2LM(sys, omega, modified, eps, opts);
      const ClusteringReport backward = check2LM(sys, modified, omega, eps, opts);
      const bool same = forward.success == backward.success &&
                        (!forward.success || forward.region == backward.region);
      if (!same) ++out.symmetry_mismatches;
    }
  }
  return out;
}

DynamicsChecksResult dynamicsChecks(std::uint64_t seed) {
  DynamicsChecksResult out;
  const int sites = 3;
  const int dim = 1 << sites;
  Matrix h = Matrix::Zero(dim, dim);
  for (int p = 0; p + 1 < sites; ++p)
    for (int axis = 1; axis <= 3; ++axis) {
      const int word = (axis << (2 * p)) | (axis << (2 * (p + 1)));
      h += detail::pauliWordMatrix(word, sites);
    }

  Rng rng(seed);
  Matrix x = rng.gaussianMatrix(dim, dim);
  x /= x.norm();

  const double s = 0.37, t = 0.59;
  const Matrix both = heisenbergEvolve(h, heisenbergEvolve(h, x, t), s);
  const Matrix direct = heisenbergEvolve(h, x, s + t);
  out.group_law_residual = (both - direct).norm();

  const Complex i_unit(0.0, 1.0);
  const Matrix commutator = i_unit * (h * x - x * h);
  const double dt = 1e-4;
  auto central = [&](double step) -> Matrix {
    return (heisenbergEvolve(h, x, step) - heisenbergEvolve(h, x, -step)) / (2.0 * step);
  };
  const Matrix richardson = (4.0 * central(dt / 2) - central(dt)) / 3.0;
  out.derivative_residual = (richardson - commutator).norm();
  return out;
}

}  // namespace sweeps

// ---------------------------------------------------------------- engine

namespace {

json parseConfig(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: malformed JSON");
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("config: missing string field 'kind'");
  if (!j.contains("seed") || !j["seed"].is_number_unsigned())
    throw ConfigError("config: missing unsigned field 'seed'");
  return j;
}

Complex complexFrom(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

Vector vectorFrom(const json& j) {
  if (!j.is_array()) throw ConfigError("expected array of [re, im] pairs");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complexFrom(j[i]);
  return v;
}

Matrix matrixFrom(const json& j, int rows, int cols) {
  const Vector flat = vectorFrom(j);
  if (flat.size() != static_cast<Eigen::Index>(rows) * cols)
    throw ConfigError("matrix entry count does not match dimensions");
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = flat(r * cols + c);
  return m;
}

StarAlgebra algebraFromSpec(const json& spec) {
  if (spec.is_string()) return sweeps::algebraByName(spec.get<std::string>());
  if (spec.is_object()) {
    if (spec.contains("matrix_algebra"))
      return StarAlgebra::fullMatrixAlgebra(spec["matrix_algebra"].get<int>());
    if (spec.contains("pauli_sites"))
      return StarAlgebra::pauliChain(spec["pauli_sites"].get<int>());
    if (spec.contains("ambient_dim") && spec.contains("basis"))
      return parseAlgebraDocument(spec.dump()).algebra;
  }
  throw ConfigError("payload: unrecognized algebra spec");
}

PositiveFunctional functionalFromSpec(const StarAlgebra& a, const json& spec) {
  if (spec.is_string() && spec.get<std::string>() == "trace") {
    const int n = a.ambientDim();
    return stateFromDensityMatrix(
        a, Matrix::Identity(n, n) / static_cast<double>(n));
  }
  if (spec.is_object()) {
    if (spec.contains("values")) {
      Vector values = vectorFrom(spec["values"]);
      if (values.size() != a.dim())
        throw ConfigError("functional values length does not match the algebra");
      return PositiveFunctional::fromValues(a, std::move(values));
    }
    if (spec.contains("density"))
      return stateFromDensityMatrix(
          a, matrixFrom(spec["density"], a.ambientDim(), a.ambientDim()));
  }
  throw ConfigError("payload: unrecognized functional spec");
}

json matrixTo(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out.push_back(json::array({std::real(m(r, c)), std::imag(m(r, c))}));
  return out;
}

struct KindResult {
  std::string status = "fail";
  std::map<std::string, double> metrics;
  json extra = json::object();
  // optional CSV tables, written as <prefix>_<name>.csv
  std::vector<std::pair<std::string, std::string>> csvs;
};

KindResult runGns(const json& payload, std::uint64_t /*seed*/) {
  const StarAlgebra a = algebraFromSpec(payload.at("algebra"));
  const PositiveFunctional omega = functionalFromSpec(a, payload.at("functional"));
  const double tol = payload.value("tol", 1e-10);
  const GnsTriple g = gnsConstruct(a, omega, tol);
  double residual = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const Complex rebuilt = inner(Vector(g.rep[i] * g.cyclic_vector), g.cyclic_vector);
    residual = std::max(residual, std::abs(rebuilt - omega.values()(i)));
  }
  const int rank = numericalRank(g.lambda, 1e-10);
  KindResult out;
  out.metrics["hilbert_dim"] = g.hilbert_dim;
  out.metrics["reconstruction_residual"] = residual;
  out.metrics["ultracyclic_rank"] = rank;
  out.metrics["kappa"] = checkSeminormDomination(a, omega);
  out.extra["gns"] = json::parse(gnsToJson(g));
  out.status = (residual < 1e-9 && rank == g.hilbert_dim) ? "pass" : "fail";
  return out;
}

KindResult runModify(const json& payload, std::uint64_t seed) {
  const StarAlgebra a = algebraFromSpec(payload.at("algebra"));
  const PositiveFunctional omega = functionalFromSpec(a, payload.at("functional"));
  const AlgebraElement b = a.element(vectorFrom(payload.at("b")));

  KindResult out;
  const IntertwinerBuild build = buildIntertwiner(a, omega, b);
  out.metrics["prop6_forward_residual"] = build.intertwiner.residual;
  out.metrics["unitarity_defect"] = build.intertwiner.unitarity_defect;
  out.metrics["subspace_dim"] = build.subspace.dim();

  double converse = 0.0;
  try {
    const AlgebraElement solved = solveModifier(a, omega, build.modified);
    converse = (localModify(a, omega, solved).values() - build.modified.values())
                   .cwiseAbs()
                   .maxCoeff();
  } catch (const SingularStateError&) {
    ModifierSearchOptions opts;
    opts.seed = seed;
    converse = searchModifier(a, omega, build.modified, opts).residual;
  }
  out.metrics["prop6_converse_residual"] = converse;
  out.extra["prop6_forward_residual"] = build.intertwiner.residual;
  out.extra["prop6_converse_residual"] = converse;
  out.extra["subspace_dim"] = build.subspace.dim();
  out.extra["unitarity_defect"] = build.intertwiner.unitarity_defect;
  out.status = (build.intertwiner.residual < 1e-8 &&
                build.intertwiner.unitarity_defect < 1e-10 && converse < 1e-9)
                   ? "pass"
                   : "fail";
  return out;
}

KindResult runSpatial(const json& payload, std::uint64_t /*seed*/) {
  const StarAlgebra a = algebraFromSpec(payload.at("algebra"));
  const PositiveFunctional omega = functionalFromSpec(a, payload.at("functional"));
  const json& dspec = payload.at("derivation");
  Derivation delta;
  if (dspec.is_object() && dspec.contains("inner")) {
    delta = innerDerivation(a, a.element(vectorFrom(dspec["inner"])));
  } else if (dspec.is_object() && dspec.contains("map")) {
    const DerivationCheck check = checkDerivation(a, matrixFrom(dspec["map"], a.dim(), a.dim()));
    delta = check.derivation;
  } else {
    throw ConfigError("payload: derivation needs 'inner' coefficients or a 'map'");
  }

  const GnsTriple g = gnsConstruct(a, omega);
  const EffectiveHamiltonian ham = solveSpatial(a, g, delta);
  const BoundReport bound = estimateBoundConstant(a, omega, delta);

  KindResult out;
  out.metrics["spatial"] = ham.spatial ? 1.0 : 0.0;
  out.metrics["residual"] = ham.residual;
  out.metrics["c_lower"] = bound.c_lower;
  out.metrics["c_upper"] = bound.c_upper;
  out.metrics["kappa"] = bound.kappa;
  out.extra["spatial"] = ham.spatial;
  out.extra["residual"] = ham.residual;
  out.extra["c_lower"] = bound.c_lower;
  out.extra["c_upper"] = bound.c_upper;
  out.extra["kappa"] = bound.kappa;
  out.extra["hamiltonian"] = matrixTo(ham.matrix);
  out.status = ham.spatial ? "pass" : "fail";
  return out;
}

KindResult runCommutant(const json& payload, std::uint64_t /*seed*/) {
  const StarAlgebra a = algebraFromSpec(payload.at("algebra"));
  std::vector<Matrix> rep;
  if (payload.contains("functional")) {
    const PositiveFunctional omega = functionalFromSpec(a, payload.at("functional"));
    rep = gnsConstruct(a, omega).rep;
  } else {
    rep = a.basis();  // defining representation
  }
  const CommutantBasis comm = weakCommutant(rep);
  KindResult out;
  out.metrics["dimension"] = comm.dimension;
  out.metrics["worst_commutation"] = comm.worst_commutation;
  out.metrics["star_closed"] = comm.is_star_closed ? 1.0 : 0.0;
  out.metrics["algebra_closed"] = comm.is_algebra_closed ? 1.0 : 0.0;
  bool equality_ok = true;
  if (payload.contains("generating_indices")) {
    std::vector<Matrix> generating;
    for (const json& idx : payload["generating_indices"])
      generating.push_back(rep.at(idx.get<size_t>()));
    const CommutantEqualityReport eq = checkCommutantEquality(rep, generating);
    out.metrics["equality"] = eq.equal ? 1.0 : 0.0;
    out.metrics["mutual_residual"] = eq.mutual_residual;
    equality_ok = eq.equal;
  }
  out.status =
      (comm.is_star_closed && comm.is_algebra_closed && equality_ok) ? "pass" : "fail";
  return out;
}

KindResult runDecompose(const json& payload, std::uint64_t /*seed*/) {
  const StarAlgebra a = algebraFromSpec(payload.at("algebra"));
  const PositiveFunctional omega = functionalFromSpec(a, payload.at("functional"));
  std::vector<AlgebraElement> generators;
  for (const json& spec : payload.at("generators"))
    generators.push_back(a.element(vectorFrom(spec)));
  const DirectSumReport report = decomposeDirectSum(a, omega, generators);

  KindResult out;
  out.metrics["orthogonality_max"] = report.orthogonality_max;
  out.metrics["completeness_residual"] = report.completeness_residual;
  out.extra["orthogonality_max"] = report.orthogonality_max;
  out.extra["completeness_residual"] = report.completeness_residual;
  json blocks = json::array();
  double worst_block = 0.0;
  for (const DirectSumBlock& block : report.blocks) {
    blocks.push_back({{"dim", block.dim},
                      {"equivalence_residual", block.equivalence_residual}});
    worst_block = std::max(worst_block, block.equivalence_residual);
  }
  out.extra["blocks"] = std::move(blocks);
  out.metrics["max_block_residual"] = worst_block;
  out.status = report.pass() ? "pass" : (report.orthogonal || report.complete) ? "partial" : "fail";
  return out;
}

std::string regionCsv(const ClusteringReport& report) {
  std::ostringstream os;
  os << "region,estimate,pass\n";
  for (const RegionSearchRow& row : report.table) {
    std::ostringstream cell;
    for (size_t i = 0; i < row.region.sites.size(); ++i) {
      if (i) cell << '+';
      cell << row.region.sites[i];
    }
    os << (row.region.sites.empty() ? "empty" : cell.str()) << ','
       << std::scientific << row.estimate << ',' << (row.pass ? 1 : 0) << '\n';
  }
  return os.str();
}

KindResult runLatticeDemo(const json& payload, std::uint64_t seed) {
  const int n_sites = payload.at("n_sites").get<int>();
  const LatticeSystem sys(n_sites);
  const double eps = payload.value("epsilon", 1e-10);

  KindResult out;
  if (payload.contains("lambda") && payload.contains("gamma")) {
    std::vector<int> lam = payload["lambda"].get<std::vector<int>>();
    std::vector<int> gam = payload["gamma"].get<std::vector<int>>();
    const DemoReport demo =
        demoSection3(sys, Region::of(lam), Region::of(gam), seed, 50, eps);
    out.metrics["max_equality_deviation"] = demo.max_equality_deviation;
    out.metrics["two_lm_success"] = demo.two_lm.success ? 1.0 : 0.0;
    out.metrics["two_lm_region_size"] =
        demo.two_lm.success ? demo.two_lm.region.size() : -1.0;
    out.metrics["one_lm_established"] = demo.one_lm.established ? 1.0 : 0.0;
    out.extra["two_lm_region"] = demo.two_lm.success ? demo.two_lm.region.str() : "none";
    out.metrics["strict_lm_success"] = demo.strict_lm.success ? 1.0 : 0.0;
    out.extra["strict_lm_region"] =
        demo.strict_lm.success ? demo.strict_lm.region.str() : "none";
    out.extra["one_lm_path"] = demo.one_lm.path;
    out.csvs.push_back({"regions", regionCsv(demo.two_lm)});
    out.status = demo.pass ? "pass" : "fail";
    return out;
  }

  if (!payload.contains("b_support"))
    throw ConfigError("lattice-demo payload needs lambda+gamma or b_support");
  // Almost-clustering / 2LM experiment with an explicit local b.
  std::vector<Eigen::Vector3d> dirs;
  if (payload.contains("directions")) {
    for (const json& row : payload["directions"]) {
      if (!row.is_array() || row.size() != 3)
        throw ConfigError("directions must be [x,y,z] triples");
      Eigen::Vector3d n(row[0].get<double>(), row[1].get<double>(), row[2].get<double>());
      dirs.push_back(n);
    }
  } else {
    Rng rng(Rng::derive(seed, 7));
    for (int p = 0; p < n_sites; ++p) dirs.push_back(rng.unitVector3());
  }
  if (static_cast<int>(dirs.size()) != n_sites)
    throw ConfigError("directions count must equal n_sites");
  const PositiveFunctional omega = productState(dirs, sys);

  const Region support = Region::of(payload["b_support"].get<std::vector<int>>());
  const int local_words = 1 << (2 * support.size());
  Vector local;
  if (payload.contains("b_components")) {
    local = vectorFrom(payload["b_components"]);
    if (local.size() != local_words)
      throw ConfigError("b_components length must be 4^|b_support|");
  } else {
    Rng rng(Rng::derive(seed, 8));
    local = rng.gaussianVector(local_words);
  }
  const Vector full = sys.embedCoeffs(local, support, sys.fullRegion());
  AlgebraElement b{full, sys.denseLocalMatrix(full, sys.fullRegion())};

  SweepOptions opts;
  opts.seed = Rng::derive(seed, 9);
  const ClusteringReport ac = checkAlmostClustering(sys, omega, b, eps, opts);

  // 2LM against the normalized modification.
  const Complex norm_sq_c =
      (localModify(sys.algebra(), omega, b).values().array() *
       sys.algebra().identityCoeffs().array())
          .sum();
  const double norm_sq = std::real(norm_sq_c);
  if (norm_sq <= 1e-12)
    throw DegenerateGeneratorError("lattice-demo: omega(b*b) vanishes", norm_sq);
  AlgebraElement b_unit{b.coeffs / std::sqrt(norm_sq), b.matrix / std::sqrt(norm_sq)};
  const PositiveFunctional modified = localModify(sys.algebra(), omega, b_unit);
  const ClusteringReport two_lm = check2LM(sys, omega, modified, eps, opts);

  out.metrics["ac_success"] = ac.success ? 1.0 : 0.0;
  out.metrics["ac_estimate"] = ac.success ? ac.estimate : ac.best_estimate;
  out.metrics["two_lm_success"] = two_lm.success ? 1.0 : 0.0;
  out.metrics["two_lm_estimate"] = two_lm.success ? two_lm.estimate : two_lm.best_estimate;
  out.extra["ac_region"] = ac.success ? ac.region.str() : "none";
  out.extra["two_lm_region"] = two_lm.success ? two_lm.region.str() : "none";
  out.csvs.push_back({"ac_regions", regionCsv(ac)});
  out.csvs.push_back({"two_lm_regions", regionCsv(two_lm)});
  out.status = (ac.success && two_lm.success) ? "pass" : "fail";
  return out;
}

KindResult runSweepKind(const json& payload, std::uint64_t seed, int jobs) {
  const std::string suite = payload.at("suite").get<std::string>();
  const int trials = payload.value("trials", 0);
  std::vector<std::string> algebras;
  if (payload.contains("algebras"))
    algebras = payload["algebras"].get<std::vector<std::string>>();

  KindResult out;
  const bool needs_trials = suite == "gns" || suite == "prop6-forward" ||
                            suite == "prop6-converse" || suite == "spatial" ||
                            suite == "hamiltonian-relation";
  if (needs_trials && trials <= 0) {
    out.status = "partial";
    return out;
  }

  if (suite == "gns") {
    if (algebras.empty()) algebras = {"m2", "m3", "m2xm2"};
    const auto r = sweeps::gnsSweep(algebras, trials, seed, jobs);
    out.metrics["trials"] = r.trials;
    out.metrics["rank_failures"] = r.rank_failures;
    out.metrics["max_reconstruction_residual"] = r.max_reconstruction_residual;
    out.status = r.pass() ? "pass" : "fail";
  } else if (suite == "prop6-forward") {
    if (algebras.empty()) algebras = {"m2", "m2xm2"};
    const auto r = sweeps::prop6ForwardSweep(algebras, trials, seed, jobs);
    out.metrics["trials"] = r.trials;
    out.metrics["failures"] = r.failures;
    out.metrics["max_unitarity_defect"] = r.max_unitarity_defect;
    out.metrics["max_intertwining_residual"] = r.max_intertwining_residual;
    out.status = r.pass() ? "pass" : "fail";
  } else if (suite == "prop6-converse") {
    if (algebras.empty()) algebras = {"m2", "m3"};
    const auto r = sweeps::prop6ConverseSweep(algebras, trials, seed, jobs);
    out.metrics["trials"] = r.trials;
    out.metrics["failures"] = r.failures;
    out.metrics["max_deviation"] = r.max_deviation;
    out.status = r.pass() ? "pass" : "fail";
  } else if (suite == "prop7") {
    const auto r = sweeps::prop7Curated(payload.value("steps", 25));
    json rows = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"name", row.name},
                      {"expected_convergent", row.expected_convergent},
                      {"converged", row.converged},
                      {"final_error", row.final_error},
                      {"support_compatible", row.support_compatible}});
      out.metrics["final_error_" + row.name] = row.final_error;
    }
    out.extra["rows"] = std::move(rows);
    out.status = r.pass() ? "pass" : "fail";
  } else if (suite == "spatial") {
    const std::string algebra = algebras.empty() ? "m2" : algebras.front();
    const auto r = sweeps::spatialSweep(algebra, trials, seed,
                                        payload.value("bound_samples", 200), jobs);
    out.metrics["trials"] = r.trials;
    out.metrics["failures"] = r.failures;
    out.metrics["max_residual"] = r.max_residual;
    out.metrics["max_recovery_residual"] = r.max_recovery_residual;
    out.metrics["sandwich_violations"] = r.sandwich_violations;
    out.metrics["bound_violations"] = r.bound_violations;
    out.status = r.pass() ? "pass" : "fail";
  } else if (suite == "hamiltonian-relation") {
    const std::string algebra = algebras.empty() ? "m2" : algebras.front();
    const auto r = sweeps::hamiltonianRelationSweep(algebra, trials, seed, jobs);
    out.metrics["trials"] = r.trials;
    out.metrics["failures"] = r.failures;
    out.metrics["max_commutant_residual"] = r.max_commutant_residual;
    out.status = r.pass() ? "pass" : "fail";
  } else if (suite == "commutant") {
    const auto r = sweeps::commutantChecks();
    out.metrics["trace_gns_dim"] = r.trace_gns_dim;
    out.metrics["defining_dim"] = r.defining_dim;
    out.metrics["prop11_n2"] = r.prop11_n2 ? 1.0 : 0.0;
    out.metrics["prop11_n3"] = r.prop11_n3 ? 1.0 : 0.0;
    out.metrics["decomposition_orthogonality"] = r.decomposition_orthogonality;
    out.metrics["decomposition_completeness"] = r.decomposition_completeness;
    out.metrics["decomposition_block_residual"] = r.decomposition_block_residual;
    out.status = r.pass() ? "pass" : "fail";
  } else if (suite == "lattice") {
    const auto r = sweeps::latticeChecks(seed, payload.value("directions", 100),
                                         payload.value("demo_samples", 50),
                                         payload.value("symmetry_trials", 20));
    out.metrics["max_spectrum_deviation"] = r.max_spectrum_deviation;
    out.metrics["max_eigenrelation_residual"] = r.max_eigenrelation_residual;
    out.metrics["demo_equality_deviation"] = r.demo_equality_deviation;
    out.metrics["demo_region_ok"] = r.demo_region_ok ? 1.0 : 0.0;
    out.metrics["ghz_ac_failed"] = r.ghz_ac_failed ? 1.0 : 0.0;
    out.metrics["ghz_witness"] = r.ghz_witness;
    out.metrics["symmetry_mismatches"] = r.symmetry_mismatches;
    out.status = r.pass() ? "pass" : "fail";
  } else if (suite == "dynamics") {
    const auto r = sweeps::dynamicsChecks(seed);
    out.metrics["group_law_residual"] = r.group_law_residual;
    out.metrics["derivative_residual"] = r.derivative_residual;
    out.status = r.pass() ? "pass" : "fail";
  } else {
    throw ConfigError("unknown sweep suite '" + suite + "'");
  }
  return out;
}

}  // namespace

RunReport runExperiment(const std::string& config_text, const RunOptions& opts) {
  const json config = parseConfig(config_text);
  const std::string kind = config["kind"].get<std::string>();
  std::uint64_t seed = config["seed"].get<std::uint64_t>();
  if (opts.seed_override) seed = *opts.seed_override;
  const json payload = config.value("payload", json::object());
  const std::string output_prefix = config.value("output", kind);

  KindResult result;
  if (kind == "gns") result = runGns(payload, seed);
  else if (kind == "modify") result = runModify(payload, seed);
  else if (kind == "spatial") result = runSpatial(payload, seed);
  else if (kind == "commutant") result = runCommutant(payload, seed);
  else if (kind == "decompose") result = runDecompose(payload, seed);
  else if (kind == "lattice-demo") result = runLatticeDemo(payload, seed);
  else if (kind == "sweep") result = runSweepKind(payload, seed, opts.jobs);
  else throw ConfigError("unknown kind '" + kind + "'");

  for (const auto& [name, value] : result.metrics)
    if (!std::isfinite(value))
      throw NumericalFailureError("report metric '" + name + "' is not finite");

  json report;
  report["kind"] = kind;
  report["seed"] = seed;
  report["status"] = result.status;
  json metrics = json::object();
  for (const auto& [name, value] : result.metrics) metrics[name] = value;
  report["metrics"] = std::move(metrics);
  for (auto it = result.extra.begin(); it != result.extra.end(); ++it)
    report[it.key()] = it.value();

  RunReport out;
  out.kind = kind;
  out.status = result.status;
  out.metrics = result.metrics;
  // Canonical bytes: identical for identical (config, seed) at any jobs
  // count, so artifact paths stay out of the serialized report.
  out.report_json = report.dump(2);

  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    const std::filesystem::path base =
        std::filesystem::path(opts.out_dir) / output_prefix;
    const std::string report_path = base.string() + "_report.json";
    {
      std::ofstream f(report_path, std::ios::binary);
      f << out.report_json << '\n';
    }
    out.artifacts.push_back(report_path);
    for (const auto& [name, content] : result.csvs) {
      const std::string csv_path = base.string() + "_" + name + ".csv";
      std::ofstream f(csv_path, std::ios::binary);
      f << content;
      out.artifacts.push_back(csv_path);
    }
  }

  out.exit_code = result.status == "pass" ? 0 : result.status == "partial" ? 3 : 2;
  return out;
}

RunReport runExperimentFile(const std::string& path, const RunOptions& opts) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buffer;
  buffer << f.rdbuf();
  return runExperiment(buffer.str(), opts);
}

}  // namespace qstar
