// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Every tolerance is pinned here, in code.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "qstar/experiments.hpp"

using namespace qstar;

namespace {

constexpr std::uint64_t kSeed = 20260809;

struct Gate {
  int failures = 0;
  int index = 0;

  void report(const std::string& name, bool pass, double seconds, double budget,
              const std::string& detail) {
    const bool in_time = seconds <= budget;
    const bool ok = pass && in_time;
    if (!ok) ++failures;
    std::printf("[%s] %2d. %-28s %s (%.2fs/%.0fs budget)\n", ok ? "PASS" : "FAIL", ++index,
                name.c_str(), detail.c_str(), seconds, budget);
  }
};

class Timer {
public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), pattern, a, b, c);
  return buffer;
}

}  // namespace

int main() {
  Gate gate;

  {  // 1. GNS reconstruction, 100 states on each of M2, M3, M2(x)M2
    Timer timer;
    const auto r = sweeps::gnsSweep({"m2", "m3", "m2xm2"}, 100, kSeed);
    gate.report("gns-reconstruction",
                r.rank_failures == 0 && r.max_reconstruction_residual < 1e-9,
                timer.seconds(), 10,
                fmt("max residual %.2e, rank failures %.0f/300",
                    r.max_reconstruction_residual, r.rank_failures));
  }

  {  // 2. forward direction: intertwiner on 100 pairs over M2 and M2(x)M2
    Timer timer;
    const auto r = sweeps::prop6ForwardSweep({"m2", "m2xm2"}, 100, kSeed);
    gate.report("prop6-forward",
                r.failures == 0 && r.max_unitarity_defect < 1e-10 &&
                    r.max_intertwining_residual < 1e-8,
                timer.seconds(), 30,
                fmt("defect %.2e, residual %.2e, failures %.0f", r.max_unitarity_defect,
                    r.max_intertwining_residual, r.failures));
  }

  {  // 3. converse direction: solveModifier reproduces omega' on M2 and M3
    Timer timer;
    const auto r = sweeps::prop6ConverseSweep({"m2", "m3"}, 100, kSeed);
    gate.report("prop6-converse", r.failures == 0 && r.max_deviation < 1e-9,
                timer.seconds(), 10,
                fmt("max deviation %.2e, failures %.0f", r.max_deviation, r.failures));
  }

  {  // 4. modifier sequences on six curated support configurations
    Timer timer;
    const auto r = sweeps::prop7Curated(25);
    bool ok = !r.rows.empty();
    double worst_convergent = 0.0;
    for (const auto& row : r.rows) {
      if (row.converged != row.expected_convergent) ok = false;
      if (row.support_compatible != row.expected_convergent) ok = false;
      if (row.expected_convergent) worst_convergent = std::max(worst_convergent, row.final_error);
    }
    gate.report("prop7-sequences", ok, timer.seconds(), 5,
                fmt("6 regimes matched, worst convergent error %.2e", worst_convergent));
  }

  double sandwich_violations = 0, bound_violations = 0;
  {  // 5. Spatiality: inner derivations recovered on faithful states
    Timer timer;
    const auto small = sweeps::spatialSweep("m2", 100, kSeed, 200);
    const auto tensor = sweeps::spatialSweep("m2xm2", 20, kSeed + 1, 200);
    const bool ok = small.failures == 0 && tensor.failures == 0 &&
                    small.max_residual < 1e-8 && tensor.max_residual < 1e-8 &&
                    small.max_recovery_residual < 1e-8 &&
                    tensor.max_recovery_residual < 1e-8;
    sandwich_violations = small.sandwich_violations + tensor.sandwich_violations;
    bound_violations = small.bound_violations + tensor.bound_violations;
    gate.report("spatial-recovery", ok, timer.seconds(), 60,
                fmt("residual %.2e, commutant residual %.2e",
                    std::max(small.max_residual, tensor.max_residual),
                    std::max(small.max_recovery_residual, tensor.max_recovery_residual)));
  }

  {  // 6. Effective-Hamiltonian relation through the intertwiner
    Timer timer;
    const auto r = sweeps::hamiltonianRelationSweep("m2", 100, kSeed);
    gate.report("hamiltonian-relation",
                r.failures == 0 && r.max_commutant_residual < 1e-8, timer.seconds(), 30,
                fmt("commutant residual %.2e, failures %.0f", r.max_commutant_residual,
                    r.failures));
  }

  {  // 7. Bound constants: sandwich and the modified inequality, from 5's trials
    gate.report("bound-constants", sandwich_violations == 0 && bound_violations == 0, 0.0,
                60,
                fmt("sandwich violations %.0f, modified-bound violations %.0f",
                    sandwich_violations, bound_violations));
  }

  {  // 8. commutant theory: dimensions, generating-subset equality, blocks
    Timer timer;
    const auto r = sweeps::commutantChecks();
    gate.report("commutant-theory", r.pass(), timer.seconds(), 30,
                fmt("trace dim %.0f, defining dim %.0f, block residual %.2e",
                    r.trace_gns_dim, r.defining_dim, r.decomposition_block_residual));
  }

  {  // 9. Lattice: spectra, flipped basis, demo, GHZ, 2LM symmetry
    Timer timer;
    const auto r = sweeps::latticeChecks(kSeed, 100, 50, 20);
    gate.report("lattice-section",
                r.max_spectrum_deviation < 1e-12 && r.max_eigenrelation_residual < 1e-12 &&
                    r.demo_equality_deviation < 1e-12 && r.demo_region_ok &&
                    r.ghz_ac_failed && r.ghz_witness >= 0.9 && r.symmetry_mismatches == 0,
                timer.seconds(), 60,
                fmt("demo deviation %.2e, GHZ witness %.2f, symmetry mismatches %.0f",
                    r.demo_equality_deviation, r.ghz_witness,
                    static_cast<double>(r.symmetry_mismatches)));
  }

  {  // 10. Dynamics: group law and the derivative of the Heisenberg flow
    Timer timer;
    const auto r = sweeps::dynamicsChecks(kSeed);
    gate.report("heisenberg-dynamics",
                r.group_law_residual < 1e-9 && r.derivative_residual < 1e-6,
                timer.seconds(), 5,
                fmt("group law %.2e, derivative %.2e", r.group_law_residual,
                    r.derivative_residual));
  }

  {  // 11. Determinism: byte-identical reports across runs and jobs counts
    Timer timer;
    const std::string config =
        R"({"kind": "sweep", "seed": 424242,
            "payload": {"suite": "prop6-forward", "trials": 25}})";
    RunOptions serial;
    serial.jobs = 1;
    RunOptions parallel;
    parallel.jobs = 4;
    const RunReport a = runExperiment(config, serial);
    const RunReport b = runExperiment(config, serial);
    const RunReport c = runExperiment(config, parallel);
    const bool ok = a.report_json == b.report_json && a.report_json == c.report_json;
    gate.report("report-determinism", ok, timer.seconds(), 30,
                ok ? "byte-identical at jobs 1 and 4" : "reports differ");
  }

  if (gate.failures == 0) {
    std::printf("acceptance: all %d criteria passed\n", gate.index);
    return 0;
  }
  std::printf("acceptance: %d of %d criteria FAILED\n", gate.failures, gate.index);
  return 1;
}
