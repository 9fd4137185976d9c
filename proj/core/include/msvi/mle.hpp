#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msvi/dataset.hpp"
#include "msvi/model.hpp"

namespace msvi {

inline constexpr std::size_t kMaxLogisticMleDim = 60;
inline constexpr std::size_t kMaxBrownResnickMleDim = 7;

/// Exact logistic log-likelihood of one observation. The partition sum
/// depends only on block sizes and is evaluated by a recursion over
/// (items, blocks) in O(D^3).
double logistic_full_loglik(const LogisticParams& params, std::span<const double> z);
/// Summed over replicates.
double logistic_full_loglik(const LogisticParams& params, const SpatialDataset& data);

/// Exact log-likelihood summed over replicates: the recursion above for the
/// logistic model, partition enumeration for Brown-Resnick.
double full_loglik(const ModelParams& params, const SpatialDataset& data,
                   std::size_t threads = 1);

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Maximizes f on [lo, hi]; the endpoints are also evaluated.
OptimResult golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                               double tolerance, std::size_t max_evaluations);

/// Maximizes f from x0. Converged once every vertex lies within `tolerance`
/// of the best one. f may return -inf to mark infeasible points.
OptimResult nelder_mead_max(const Objective& f, std::vector<double> x0, double step,
                            double tolerance, std::size_t max_evaluations);

struct MleBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  /// theta in [0.01, 1]; range in [0.01, 50], smoothness in [0.01, 1.99].
  static MleBounds defaults(ModelKind kind);
};

struct MleOptions {
  double tolerance = 1e-6;
  std::size_t max_evaluations = 5000;
  std::size_t threads = 1;
};

struct MleResult {
  ModelParams params = LogisticParams{};
  double loglik = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::string message;
};

/// `start` selects the model (and Brown-Resnick sites) and gives the
/// Nelder-Mead starting point; the logistic search ignores its value.
MleResult fit_mle(const SpatialDataset& data, const ModelParams& start, const MleBounds& bounds,
                  const MleOptions& options = {});

}  // namespace msvi
