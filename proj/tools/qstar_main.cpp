#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "qstar/errors.hpp"
#include "qstar/experiments.hpp"

namespace {

void printReport(const qstar::RunReport& report) {
  std::cout << "kind:    " << report.kind << '\n';
  std::cout << "status:  " << report.status << '\n';
  if (!report.metrics.empty()) {
    std::cout << "metrics:\n";
    size_t width = 0;
    for (const auto& [name, value] : report.metrics) width = std::max(width, name.size());
    for (const auto& [name, value] : report.metrics)
      std::cout << "  " << std::left << std::setw(static_cast<int>(width) + 2) << name
                << std::setprecision(12) << value << '\n';
  }
  for (const std::string& path : report.artifacts)
    std::cout << "wrote:   " << path << '\n';
}

int runConfig(const std::string& path, const qstar::RunOptions& opts, bool require_sweep) {
  try {
    const qstar::RunReport report = qstar::runExperimentFile(path, opts);
    if (require_sweep && report.kind != "sweep") {
      std::cerr << "error: '" << path << "' is not a sweep config (kind=" << report.kind
                << ")\n";
      return 1;
    }
    printReport(report);
    return report.exit_code;
  } catch (const qstar::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const qstar::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qstar: numerical workbench for states, GNS representations, local "
               "modifications, derivations and spin-lattice experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  int jobs = 1;

  auto addCommon = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory for reports");
    cmd->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { has_seed_override = true; });
    cmd->add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "execute one experiment config");
  addCommon(run);
  CLI::App* sweep = app.add_subcommand("sweep", "execute a sweep config (kind=sweep)");
  addCommon(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
  }

  qstar::RunOptions opts;
  opts.jobs = jobs;
  if (has_seed_override) opts.seed_override = seed_override;
  opts.out_dir = out_dir;
  if (opts.out_dir.empty()) {
    if (const char* env = std::getenv("QSTAR_OUT_DIR")) opts.out_dir = env;
  }

  return runConfig(config_path, opts, sweep->parsed());
}
