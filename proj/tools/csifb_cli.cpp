// Command-line front end: analytic bounds, Monte Carlo sweeps and presets.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "csifb/analytic_bounds.hpp"
#include "csifb/harness.hpp"
#include "csifb/selftest.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitResource = 3;

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<int> jobs;
  bool strict = false;
};

void add_run_options(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config, "experiment config (INI)")->required();
  cmd->add_option("--out", args.out, "CSV output path (default: stdout)");
  cmd->add_option("--seed", args.seed, "master seed override");
  cmd->add_option("--trials", args.trials, "Monte Carlo trials per point");
  cmd->add_option("--jobs", args.jobs, "worker threads");
  cmd->add_flag("--strict", args.strict, "exit 3 when a point exceeds a resource cap");
}

int run(const RunArgs& args, csifb::RunMode mode) {
  csifb::ExperimentConfig cfg = csifb::load_config(args.config);
  if (args.seed) cfg.master_seed = *args.seed;
  if (args.trials) cfg.n_trials = *args.trials;
  if (args.jobs) cfg.jobs = *args.jobs;
  csifb::validate(cfg);

  const auto records = csifb::run_sweep(cfg, mode, &std::cerr);
  if (args.out.empty())
    csifb::write_csv(records, std::cout);
  else
    csifb::emit_csv(records, args.out);

  bool capped = false;
  for (const auto& r : records) capped = capped || r.status == "rvq-bits-over-cap";
  if (capped) std::cerr << "warning: some RVQ points exceed the codebook bit cap and were not simulated\n";
  return capped && args.strict ? kExitResource : 0;
}

int list_presets() {
  for (const std::string& name : csifb::preset_names()) {
    const csifb::ChannelStats s = csifb::preset_stats(name, 64);
    std::printf("%-12s %-9s L=%d coefficients=%d sigma_H^2=%.4f  taps:", name.c_str(),
                s.kind() == csifb::ModelKind::DiscreteDip ? "dip" : "physical", s.n_taps(), s.n_coefficients(),
                s.total_power());
    for (Eigen::Index l = 0; l < s.tap_variances().size(); ++l) std::printf(" %.4f", s.tap_variances()(l));
    std::printf("\n");
  }
  return 0;
}

int selftest() {
  int failed = 0;
  for (const auto& r : csifb::run_selftest()) {
    std::printf("%s  %-40s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    failed += r.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSIT feedback rate-gap bounds and Monte Carlo for MIMO-OFDM zero-forcing"};
  app.require_subcommand(1);

  RunArgs bounds_args, sim_args, sweep_args;
  auto* bounds = app.add_subcommand("bounds", "analytic bounds only");
  add_run_options(bounds, bounds_args);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo only");
  add_run_options(simulate, sim_args);
  auto* sweep = app.add_subcommand("sweep", "analytic bounds and Monte Carlo");
  add_run_options(sweep, sweep_args);
  auto* presets = app.add_subcommand("presets", "list channel presets");
  auto* self = app.add_subcommand("selftest", "run the invariant checks on small sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*bounds) return run(bounds_args, csifb::RunMode::Bounds);
    if (*simulate) return run(sim_args, csifb::RunMode::Simulate);
    if (*sweep) return run(sweep_args, csifb::RunMode::Sweep);
    if (*presets) return list_presets();
    if (*self) return selftest();
  } catch (const csifb::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const csifb::ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
