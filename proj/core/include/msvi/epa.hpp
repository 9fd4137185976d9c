#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "msvi/dataset.hpp"
#include "msvi/dual.hpp"
#include "msvi/partition.hpp"
#include "msvi/random.hpp"

namespace msvi {

/// Parameters of the Evans-Pitman attraction partition distribution.
/// alpha: mass, delta: discount in [0, 1), rho: similarity scale.
struct EpaParams {
  double alpha = 1.0;
  double delta = 0.0;
  double rho = 1.0;

  /// Throws DomainError unless 0 <= delta < 1, alpha > -delta, rho > 0.
  void validate() const;
};

/// Log-probability of `partition` under the sequential allocation rule with
/// items taken in the order 0, 1, ..., D-1 and similarity exp(-d_ij / rho).
double epa_log_pmf(const EpaParams& params, const DistanceMatrix& dist,
                   const SetPartition& partition);

/// Log-pmf together with its gradient with respect to (alpha, delta, rho).
struct EpaScore {
  double log_pmf = 0.0;
  std::array<double, 3> grad{};
};
EpaScore epa_log_pmf_grad(const EpaParams& params, const DistanceMatrix& dist,
                          const SetPartition& partition);

struct EpaDraw {
  SetPartition partition;
  double log_pmf = 0.0;
};

/// Draws a partition by sequential allocation. The reported log_pmf is
/// bit-identical to epa_log_pmf(params, dist, partition).
EpaDraw epa_sample(const EpaParams& params, const DistanceMatrix& dist, RandomStream& rng);

namespace detail {

/// Log allocation probabilities for item `t` given the labels of items
/// [0, t) (which occupy `num_blocks` blocks). Writes num_blocks + 1 entries:
/// joining existing block b at index b, opening a new block last.
template <class T>
void epa_allocation_log_probs(const T& alpha, const T& delta, const T& rho,
                              const DistanceMatrix& dist, const int* labels, std::size_t t,
                              std::size_t num_blocks, std::vector<T>& out) {
  using std::exp;
  using std::log;
  out.assign(num_blocks + 1, T(0.0));
  const double k = static_cast<double>(num_blocks);
  const T log_denom = log(alpha + static_cast<double>(t));
  out[num_blocks] = log(alpha + delta * k) - log_denom;
  const T log_join = log(static_cast<double>(t) - delta * k) - log_denom;

  // Similarity weights exp(-d/rho), normalized by the largest for stability.
  double min_d = dist(t, 0);
  for (std::size_t s = 1; s < t; ++s) min_d = std::min(min_d, dist(t, s));
  std::vector<T> block_sum(num_blocks, T(0.0));
  T total(0.0);
  for (std::size_t s = 0; s < t; ++s) {
    const T w = exp((min_d - dist(t, s)) / rho);
    block_sum[labels[s]] += w;
    total += w;
  }
  const T log_total = log(total);
  for (std::size_t b = 0; b < num_blocks; ++b) {
    out[b] = log_join + (value(block_sum[b]) > 0.0 ? log(block_sum[b]) - log_total
                                                   : T(-INFINITY));
  }
}

template <class T>
T epa_log_pmf_impl(const T& alpha, const T& delta, const T& rho, const DistanceMatrix& dist,
                   const SetPartition& partition) {
  const auto& labels = partition.labels();
  T total(0.0);
  std::vector<T> probs;
  std::size_t num_blocks = labels.empty() ? 0 : 1;
  for (std::size_t t = 1; t < labels.size(); ++t) {
    epa_allocation_log_probs(alpha, delta, rho, dist, labels.data(), t, num_blocks, probs);
    total += probs[static_cast<std::size_t>(labels[t])];
    if (static_cast<std::size_t>(labels[t]) == num_blocks) ++num_blocks;
  }
  return total;
}

}  // namespace detail
}  // namespace msvi
