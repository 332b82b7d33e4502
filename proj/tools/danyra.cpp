// danyra run --config <path> [--preset NAME] [--seed N] [--iters N] [--out DIR] [--mode ineq|eq]

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "danyra/config.hpp"
#include "danyra/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed anytime-feasible resource allocation simulator"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "Run an experiment and write trace.csv, bounds.json, report.json");

  std::string config_path;
  std::string preset;
  std::uint64_t seed = 0;
  std::size_t iters = 0;
  std::string out;
  std::string mode;
  bool print_config = false;
  run->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  run->add_option("--preset", preset, "Named experiment")
      ->check(CLI::IsMember(danyra::preset_names()));
  run->add_option("--seed", seed, "Instance generator seed");
  run->add_option("--iters", iters, "Iteration count")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Output directory");
  run->add_option("--mode", mode, "Constraint mode")->check(CLI::IsMember({"ineq", "eq"}));
  run->add_flag("--print-config", print_config, "Print the expanded configuration and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    danyra::ConfigOverrides ov;
    if (!preset.empty()) ov.preset = preset;
    if (run->count("--seed")) ov.seed = seed;
    if (run->count("--iters")) ov.iters = iters;
    if (!out.empty()) ov.out = out;
    if (!mode.empty()) ov.mode = mode;
    ov.threads = danyra::threads_from_env();

    std::optional<std::filesystem::path> path;
    if (!config_path.empty()) path = config_path;
    const danyra::RunConfig config = danyra::parse_config(path, ov);
    if (print_config) {
      std::cout << danyra::to_json(config).dump(2) << '\n';
      return 0;
    }
    return danyra::run(config);
  } catch (const danyra::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
