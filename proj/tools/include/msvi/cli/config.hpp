#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msvi/dataset.hpp"
#include "msvi/error.hpp"
#include "msvi/model.hpp"

namespace msvi::cli {

enum class Command { simulate, fit, mle, sweep };

std::string to_string(Command command);

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Validated experiment description read from a flat `key = value` file.
struct ExperimentConfig {
  Command command = Command::fit;
  ModelKind model = ModelKind::logistic;

  std::size_t D = 0;
  std::size_t n = 0;
  std::vector<Site> sites;  // empty: drawn uniformly in the unit square
  std::filesystem::path sites_file;
  std::filesystem::path data_file;

  // Parameters used to simulate data.
  double theta = 0.5;
  double range = 1.0;
  double smoothness = 1.0;

  // Optimizer starting values.
  double theta_init = 0.6;
  double range_init = 1.0;
  double smoothness_init = 1.0;
  double alpha_init = 0.5;
  double delta_init = 0.5;
  double rho_init = 1.0;

  std::size_t M = 25;
  std::size_t R = 5000;
  double lr_theta = 0.0;
  double lr_phi = 0.0;
  double momentum = 0.9;
  std::size_t batch = 0;
  DistanceKind distance = DistanceKind::observation;
  double tail_fraction = 0.0;
  bool record_wall_time = false;
  bool record_partitions = false;

  double mvn_accuracy = 0.0;
  std::size_t mvn_max_points = 256;
  std::size_t mvn_shifts = 12;
  double mle_tolerance = 1e-6;

  std::size_t replications = 1;
  std::vector<std::size_t> M_values;
  std::vector<std::size_t> D_values;
  std::vector<double> theta_values;
  std::vector<double> range_values;
  std::vector<double> smoothness_values;
  bool run_vi = true;
  bool run_mle = true;

  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::filesystem::path out = ".";

  /// Effective settings as normalized `key=value` strings (file values and
  /// filled defaults), sorted by key.
  std::vector<std::pair<std::string, std::string>> entries;
  /// Keys that were not in the file and took their default value.
  std::vector<std::string> defaulted;
};

/// `origin` names the source in error messages.
ExperimentConfig parse_config(std::string_view text, std::string_view origin = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Command-line overrides; they replace the file values and the seed feeds the hash.
void apply_overrides(ExperimentConfig& config, std::optional<std::uint64_t> seed,
                     std::optional<std::size_t> threads,
                     std::optional<std::filesystem::path> out);

/// FNV-1a over the sorted entries, excluding `threads` and `out`.
std::uint64_t config_hash(const ExperimentConfig& config);

/// First row of every CSV written by the tool.
std::string provenance_line(const ExperimentConfig& config);

void echo_defaults(const ExperimentConfig& config, std::ostream& log);

}  // namespace msvi::cli
