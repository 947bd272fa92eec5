#include <doctest.h>

#include "qstar/errors.hpp"
#include "qstar/experiments.hpp"

using namespace qstar;

TEST_CASE("gns experiment") {
  const RunReport report = runExperiment(
      R"({"kind": "gns", "seed": 1,
          "payload": {"algebra": "m2", "functional": "trace"}})");
  CHECK(report.status == "pass");
  CHECK(report.exit_code == 0);
  CHECK(report.metrics.at("hilbert_dim") == doctest::Approx(4.0));
  CHECK(report.metrics.at("reconstruction_residual") < 1e-9);
  CHECK(report.metrics.at("ultracyclic_rank") == doctest::Approx(4.0));
}

TEST_CASE("lattice demo experiment") {
  const RunReport report = runExperiment(
      R"({"kind": "lattice-demo", "seed": 20260809,
          "payload": {"n_sites": 4, "lambda": [2,3], "gamma": [0,1]}})");
  CHECK(report.status == "pass");
  CHECK(report.metrics.at("two_lm_region_size") == doctest::Approx(2.0));
  CHECK(report.metrics.at("max_equality_deviation") < 1e-12);
}

TEST_CASE("lattice clustering experiment with explicit b") {
  const RunReport report = runExperiment(
      R"({"kind": "lattice-demo", "seed": 5,
          "payload": {"n_sites": 3,
                      "directions": [[0,0,1],[1,0,0],[0,0,1]],
                      "b_support": [1], "epsilon": 1e-6}})");
  CHECK(report.status == "pass");
  CHECK(report.metrics.at("ac_success") == doctest::Approx(1.0));
  CHECK(report.metrics.at("two_lm_success") == doctest::Approx(1.0));
}

TEST_CASE("modify, spatial, commutant and decompose kinds") {
  const RunReport modify = runExperiment(
      R"({"kind": "modify", "seed": 3,
          "payload": {"algebra": "m2", "functional": "trace",
                      "b": [[1.4142135623730951,0],[0,0],[0,0],[0,0]]}})");
  CHECK(modify.status == "pass");
  CHECK(modify.metrics.at("subspace_dim") == doctest::Approx(2.0));
  CHECK(modify.metrics.at("prop6_forward_residual") < 1e-8);
  CHECK(modify.report_json.find("prop6_converse_residual") != std::string::npos);

  const RunReport spatial = runExperiment(
      R"({"kind": "spatial", "seed": 3,
          "payload": {"algebra": "m2", "functional": "trace",
                      "derivation": {"inner": [[1,0],[0,0],[0,0],[-1,0]]}}})");
  CHECK(spatial.status == "pass");
  CHECK(spatial.metrics.at("spatial") == doctest::Approx(1.0));
  CHECK(spatial.report_json.find("hamiltonian") != std::string::npos);

  const RunReport commutant = runExperiment(
      R"({"kind": "commutant", "seed": 3,
          "payload": {"algebra": "m2", "functional": "trace"}})");
  CHECK(commutant.status == "pass");
  CHECK(commutant.metrics.at("dimension") == doctest::Approx(4.0));

  const RunReport decompose = runExperiment(
      R"({"kind": "decompose", "seed": 3,
          "payload": {"algebra": "m2", "functional": "trace",
                      "generators": [[[1.4142135623730951,0],[0,0],[0,0],[0,0]],
                                      [[0,0],[1.4142135623730951,0],[0,0],[0,0]]]}})");
  CHECK(decompose.status == "pass");
  CHECK(decompose.metrics.at("orthogonality_max") < 1e-9);
  CHECK(decompose.metrics.at("completeness_residual") < 1e-9);
  CHECK(decompose.report_json.find("blocks") != std::string::npos);
}

TEST_CASE("algebras can be spelled out as basis documents") {
  // diagonal subalgebra of M_2 with omega = point mass at the corner
  const RunReport report = runExperiment(
      R"({"kind": "gns", "seed": 4,
          "payload": {"algebra": {"ambient_dim": 2,
                                  "basis": [[[1,0],[0,0],[0,0],[0,0]],
                                             [[0,0],[0,0],[0,0],[1,0]]]},
                      "functional": {"values": [[1,0],[0,0]]}}})");
  CHECK(report.status == "pass");
  CHECK(report.metrics.at("hilbert_dim") == doctest::Approx(1.0));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(runExperiment("("), ConfigError);
  CHECK_THROWS_AS(runExperiment("{}"), ConfigError);
  // missing seed: no silent nondeterminism
  CHECK_THROWS_AS(runExperiment(R"({"kind": "gns", "payload": {}})"), ConfigError);
  CHECK_THROWS_AS(runExperiment(R"({"kind": "quux", "seed": 1})"), ConfigError);
  CHECK_THROWS_AS(
      runExperiment(R"({"kind": "sweep", "seed": 1, "payload": {"suite": "nope"}})"),
      ConfigError);
  CHECK_THROWS_AS(runExperimentFile("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("empty sweeps are partial") {
  const RunReport report = runExperiment(
      R"({"kind": "sweep", "seed": 1, "payload": {"suite": "gns", "trials": 0}})");
  CHECK(report.status == "partial");
  CHECK(report.exit_code == 3);
  CHECK(report.metrics.empty());
}

TEST_CASE("reports are byte-identical across runs and jobs counts") {
  const std::string config =
      R"({"kind": "sweep", "seed": 31337,
          "payload": {"suite": "prop6-forward", "trials": 12}})";
  RunOptions serial;
  serial.jobs = 1;
  RunOptions parallel;
  parallel.jobs = 4;
  const RunReport a = runExperiment(config, serial);
  const RunReport b = runExperiment(config, serial);
  const RunReport c = runExperiment(config, parallel);
  CHECK(a.report_json == b.report_json);
  CHECK(a.report_json == c.report_json);
  CHECK(a.status == "pass");
}

TEST_CASE("different seeds change trial metrics but not the verdict") {
  const RunReport a = runExperiment(
      R"({"kind": "sweep", "seed": 1, "payload": {"suite": "prop6-forward", "trials": 8}})");
  const RunReport b = runExperiment(
      R"({"kind": "sweep", "seed": 2, "payload": {"suite": "prop6-forward", "trials": 8}})");
  CHECK(a.status == "pass");
  CHECK(b.status == "pass");
  CHECK(a.metrics.at("max_intertwining_residual") !=
        b.metrics.at("max_intertwining_residual"));
}

TEST_CASE("seed override is honored") {
  const std::string config =
      R"({"kind": "sweep", "seed": 1, "payload": {"suite": "prop6-forward", "trials": 6}})";
  RunOptions opts;
  opts.seed_override = 2;
  const RunReport overridden = runExperiment(config, opts);
  const RunReport direct = runExperiment(
      R"({"kind": "sweep", "seed": 2, "payload": {"suite": "prop6-forward", "trials": 6}})");
  CHECK(overridden.report_json == direct.report_json);
}
