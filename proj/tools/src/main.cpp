#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ilcfr/error.hpp"
#include "ilcfr_cli/pipeline.hpp"
#include "ilcfr_cli/reproduce.hpp"

namespace {

using namespace ilcfr;
using namespace ilcfr::cli;

constexpr std::string_view builtin_prefix = "builtin:";

ExperimentConfig resolve_config(const std::string& spec, std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = spec.starts_with(builtin_prefix)
                             ? embedded_config(spec.substr(builtin_prefix.size()))
                             : load_config(spec);
  if (seed) cfg.tune.seed = *seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative learning control from steady-state frequency response"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("--config", config, "experiment config file, or builtin:NAME")->required();
    cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    cmd->add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "override the tuner seed");
  };
  auto* design = app.add_subcommand("design", "build learning laws and report I - P1*L");
  auto* tune = app.add_subcommand("tune", "steepest-descent gain tuning");
  auto* simulate = app.add_subcommand("simulate", "run ILC iterations on the nominal plant");
  auto* sweep = app.add_subcommand("sweep", "robustness and frequency-deviation sweeps");
  auto* reproduce = app.add_subcommand("reproduce-all", "run every built-in experiment");
  auto* list = app.add_subcommand("list-configs", "print the built-in config names");
  auto* show = app.add_subcommand("show-config", "print a resolved config");
  for (auto* c : {design, tune, simulate, sweep, show}) add_common(c, true);
  add_common(reproduce, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunOptions opt{out_dir, jobs, &std::cout};
    if (*list) {
      for (const EmbeddedConfig& c : embedded_configs()) std::cout << c.name << '\n';
      return 0;
    }
    if (*reproduce) return cmd_reproduce_all(opt).all_pass() ? 0 : 1;

    const ExperimentConfig cfg = resolve_config(config, seed);
    if (*show) std::cout << render_config(cfg);
    else if (*design) cmd_design(cfg, opt);
    else if (*tune) cmd_tune(cfg, opt);
    else if (*simulate) cmd_simulate(cfg, opt);
    else if (*sweep) cmd_sweep(cfg, opt);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::config_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
