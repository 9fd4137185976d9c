#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "msvi/cli/config.hpp"
#include "msvi/random.hpp"

namespace msvi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAllFailed = 3;
inline constexpr std::size_t kBootstrapResamples = 10000;

/// Runs the configured command, writing CSVs under config.out. Progress and
/// diagnostics go to `log`. Returns a process exit code.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n = 0;
};

/// Mean, sample SD and a 95% bootstrap percentile interval for the mean.
SummaryStats summarize(std::span<const double> values, RandomStream& rng,
                       std::size_t resamples = kBootstrapResamples);

/// Linear-interpolation quantile of sorted data (p in [0, 1]).
double quantile_sorted(std::span<const double> sorted, double p);

/// Flags values outside [Q1 - 3 IQR, Q3 + 3 IQR].
std::vector<bool> flag_outliers(std::span<const double> values);

}  // namespace msvi::cli
