// Experiment runner CLI. One JSON config per experiment; only output_dir and
// seed can be overridden on the command line so manifests stay honest.

#include <CLI11.hpp>

#include <iostream>

#include "eulab/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--output-dir", args.output_dir, "override output directory");
  cmd->add_option("--seed", args.seed, "override RNG seed");
}

int run_variant(const CommonArgs& args, const std::string& variant) {
  eulab::ExperimentConfig cfg;
  try {
    cfg = eulab::load_config(args.config_path);
  } catch (const eulab::ConfigParseError& e) {
    std::cerr << e.what() << "\n";
    return static_cast<int>(eulab::ExitCode::invalid_config);
  }
  if (cfg.variant != variant) {
    std::cerr << "config declares variant '" << cfg.variant << "' but subcommand is '"
              << variant << "'\n";
    return static_cast<int>(eulab::ExitCode::invalid_config);
  }
  if (!args.output_dir.empty()) {
    cfg.output_dir = args.output_dir;
    cfg.raw["output_dir"] = args.output_dir;
  }
  if (args.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(args.seed);
    cfg.raw["seed"] = cfg.seed;
  }
  auto violations = eulab::validate(cfg);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "invalid config: " << v << "\n";
    return static_cast<int>(eulab::ExitCode::invalid_config);
  }
  eulab::RunResult res = eulab::run_experiment(cfg);
  if (!res.message.empty()) {
    (res.code == eulab::ExitCode::ok ? std::cout : std::cerr) << res.message << "\n";
  }
  return static_cast<int>(res.code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic 2D Euler laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  const char* variants[] = {"simulate", "sweep-nu", "bounds", "attractor", "autonomy"};
  const char* blurbs[] = {
      "integrate one trajectory and record its norm history",
      "vanishing-viscosity convergence sweep against the inviscid run",
      "evaluate the inequality reports on a stored trajectory",
      "pullback attractor estimate and absorbing radii",
      "asymptotic-autonomy distance sweep",
  };
  std::string chosen;
  for (int k = 0; k < 5; ++k) {
    CLI::App* cmd = app.add_subcommand(variants[k], blurbs[k]);
    add_common(cmd, args);
    cmd->callback([&chosen, name = std::string(variants[k])] { chosen = name; });
  }
  CLI::App* val = app.add_subcommand("validate", "check a config without running anything");
  std::string val_path;
  val->add_option("config", val_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  val->callback([&chosen] { chosen = "validate"; });

  CLI11_PARSE(app, argc, argv);

  if (chosen == "validate") {
    eulab::ExperimentConfig cfg;
    try {
      cfg = eulab::load_config(val_path);
    } catch (const eulab::ConfigParseError& e) {
      std::cerr << e.what() << "\n";
      return static_cast<int>(eulab::ExitCode::invalid_config);
    }
    auto violations = eulab::validate(cfg);
    for (const auto& v : violations) std::cout << v << "\n";
    if (violations.empty()) {
      std::cout << "ok\n";
      return 0;
    }
    return static_cast<int>(eulab::ExitCode::invalid_config);
  }
  return run_variant(args, chosen);
}
