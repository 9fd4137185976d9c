#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "msvi/cli/config.hpp"
#include "msvi/cli/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Variational inference for max-stable processes"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
  app.add_option("--config", config_path, "Experiment file (key = value lines)")->required();
  app.add_option("--seed", seed, "Override the seed in the config");
  app.add_option("--threads", threads, "Worker threads");
  app.add_option("--out", out, "Output directory");
  app.set_version_flag("--version", MSVI_VERSION);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : msvi::cli::kExitConfig;
  }

  try {
    auto config = msvi::cli::load_config(config_path);
    std::optional<std::filesystem::path> out_path;
    if (out) out_path = *out;
    msvi::cli::apply_overrides(config, seed, threads, out_path);
    return msvi::cli::run_experiment(config, std::cerr);
  } catch (const msvi::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return msvi::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return msvi::cli::kExitFailure;
  }
}
