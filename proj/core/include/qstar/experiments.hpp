#ifndef QSTAR_EXPERIMENTS_HPP
#define QSTAR_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qstar/commutant.hpp"
#include "qstar/lattice.hpp"

namespace qstar {

// ------------------------------------------------------------- sweeps
// Seeded verification suites shared by the CLI and the acceptance tests.
// Every trial draws from a child stream of the given seed, so results are
// identical for any jobs count.

namespace sweeps {

/// Named test algebras: "m2", "m3", "m4" (matrix units) and "m2xm2"
/// (two-site Pauli chain). Throws ConfigError for unknown names.
StarAlgebra algebraByName(const std::string& name);

struct GnsSweepResult {
  int trials = 0;
  int rank_failures = 0;  // trials where the ultra-cyclic rank missed hilbert_dim
  double max_reconstruction_residual = 0.0;
  bool pass() const { return rank_failures == 0 && max_reconstruction_residual < 1e-9; }
};
GnsSweepResult gnsSweep(const std::vector<std::string>& algebras, int trials,
                        std::uint64_t seed, int jobs = 1);

struct Prop6ForwardResult {
  int trials = 0;
  int failures = 0;
  double max_unitarity_defect = 0.0;
  double max_intertwining_residual = 0.0;
  bool pass() const {
    return failures == 0 && max_unitarity_defect < 1e-10 &&
           max_intertwining_residual < 1e-8;
  }
};
Prop6ForwardResult prop6ForwardSweep(const std::vector<std::string>& algebras, int trials,
                                     std::uint64_t seed, int jobs = 1);

struct Prop6ConverseResult {
  int trials = 0;
  int failures = 0;
  double max_deviation = 0.0;  // omega_b vs omega' on the basis
  bool pass() const { return failures == 0 && max_deviation < 1e-9; }
};
Prop6ConverseResult prop6ConverseSweep(const std::vector<std::string>& algebras, int trials,
                                       std::uint64_t seed, int jobs = 1);

struct Prop7Row {
  std::string name;
  bool expected_convergent = false;
  bool converged = false;  // final error < 1e-6 by the last step
  double final_error = 0.0;
  bool support_compatible = false;
};
struct Prop7Result {
  std::vector<Prop7Row> rows;
  bool pass() const {
    for (const auto& r : rows)
      if (r.converged != r.expected_convergent || r.support_compatible != r.expected_convergent)
        return false;
    return !rows.empty();
  }
};
/// Curated support configurations on M_2, both regimes, 25 steps each.
Prop7Result prop7Curated(int steps = 25);

struct SpatialSweepResult {
  int trials = 0;
  int failures = 0;                    // non-spatial verdicts or thrown errors
  double max_residual = 0.0;           // spatiality residual
  double max_recovery_residual = 0.0;  // commutation of H - pi(h) with the rep
  int sandwich_violations = 0;         // c_lower > c_upper + 1e-9
  int bound_violations = 0;            // modified-bound inequality failures, all samples
  double max_identity_residual = 0.0;  // Leibniz transfer identity
  bool pass() const {
    return failures == 0 && max_residual < 1e-8 && max_recovery_residual < 1e-8 &&
           sandwich_violations == 0 && bound_violations == 0;
  }
};
/// Inner derivations on seeded faithful states; checks recovery modulo the
/// commutant, the bound sandwich, and the transferred bound of omega_b
/// with bound_samples draws per trial.
SpatialSweepResult spatialSweep(const std::string& algebra, int trials, std::uint64_t seed,
                                int bound_samples = 200, int jobs = 1);

struct HamiltonianRelationResult {
  int trials = 0;
  int failures = 0;
  double max_commutant_residual = 0.0;
  bool pass() const { return failures == 0 && max_commutant_residual < 1e-8; }
};
HamiltonianRelationResult hamiltonianRelationSweep(const std::string& algebra, int trials,
                                                   std::uint64_t seed, int jobs = 1);

struct CommutantChecksResult {
  int trace_gns_dim = 0;       // expected 4
  int defining_dim = 0;        // expected 1
  bool prop11_n2 = false;
  bool prop11_n3 = false;
  double decomposition_orthogonality = 0.0;
  double decomposition_completeness = 0.0;
  double decomposition_block_residual = 0.0;
  std::vector<int> block_dims;
  bool pass() const {
    return trace_gns_dim == 4 && defining_dim == 1 && prop11_n2 && prop11_n3 &&
           decomposition_orthogonality < 1e-9 && decomposition_completeness < 1e-9 &&
           decomposition_block_residual < 1e-8 && block_dims == std::vector<int>{2, 2};
  }
};
CommutantChecksResult commutantChecks();

struct LatticeChecksResult {
  double max_spectrum_deviation = 0.0;   // sigma.n spectrum vs {1,-1}
  double max_eigenrelation_residual = 0.0;
  double demo_equality_deviation = 0.0;
  bool demo_region_ok = false;
  bool ghz_ac_failed = false;
  double ghz_witness = 0.0;
  int symmetry_trials = 0;
  int symmetry_mismatches = 0;
  bool pass() const {
    return max_spectrum_deviation < 1e-12 && max_eigenrelation_residual < 1e-12 &&
           demo_equality_deviation < 1e-12 && demo_region_ok && ghz_ac_failed &&
           ghz_witness >= 0.9 && symmetry_mismatches == 0 && symmetry_trials > 0;
  }
};
LatticeChecksResult latticeChecks(std::uint64_t seed, int directions = 100,
                                  int demo_samples = 50, int symmetry_trials = 20);

struct DynamicsChecksResult {
  double group_law_residual = 0.0;
  double derivative_residual = 0.0;
  bool pass() const { return group_law_residual < 1e-9 && derivative_residual < 1e-6; }
};
/// Heisenberg chain on three sites: group law and the finite-difference
/// derivative against i[h, .] (second-order Richardson at dt = 1e-4).
DynamicsChecksResult dynamicsChecks(std::uint64_t seed);

}  // namespace sweeps

// ------------------------------------------------------------ run engine

struct RunOptions {
  std::string out_dir;  // where report files go; empty writes nothing
  std::optional<std::uint64_t> seed_override;
  int jobs = 1;
};

struct RunReport {
  std::string kind;
  std::string status;  // "pass" | "fail" | "partial"
  std::map<std::string, double> metrics;
  std::vector<std::string> artifacts;
  std::string report_json;  // canonical serialized report (sorted keys)
  int exit_code = 1;        // 0 pass, 2 fail, 3 partial, 1 config error
};

/// Executes one experiment config:
///   {"kind": "gns"|"modify"|"spatial"|"commutant"|"decompose"|
///            "lattice-demo"|"sweep",
///    "seed": <unsigned>, "payload": {...}, "output": "prefix"?}
/// Throws ConfigError on malformed configs (the CLI maps that to exit 1).
RunReport runExperiment(const std::string& config_text, const RunOptions& opts = {});

/// Reads the config from a file and runs it.
RunReport runExperimentFile(const std::string& path, const RunOptions& opts = {});

}  // namespace qstar

#endif
