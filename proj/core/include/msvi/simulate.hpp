#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msvi/dataset.hpp"
#include "msvi/model.hpp"
#include "msvi/partition.hpp"
#include "msvi/random.hpp"

namespace msvi {

/// n i.i.d. logistic max-stable vectors of length dim (unit Frechet margins).
std::vector<std::vector<double>> sample_logistic(const LogisticParams& params, std::size_t dim,
                                                 std::size_t n, RandomStream& rng);

struct BrownResnickSample {
  std::vector<std::vector<double>> observations;
  /// Sites grouped by the spectral function attaining the maximum. Empty
  /// unless requested.
  std::vector<SetPartition> partitions;
};

/// Exact draws by extremal functions, one Gaussian path per accepted
/// function.
BrownResnickSample sample_brown_resnick(const BrownResnickParams& params, std::size_t n,
                                        RandomStream& rng, bool record_partitions = false);

SetPartition empirical_partition(std::span<const std::uint64_t> event_ids);

struct SimulationRequest {
  ModelParams params;
  std::vector<Site> sites;
  std::size_t n = 1;
  std::uint64_t seed = 0;
  bool record_partitions = false;
};

struct SimulationResult {
  SpatialDataset data;
  std::vector<SetPartition> partitions;
};

/// Replicate i uses its own stream derived from (seed, i), so results do not
/// depend on how replicates are scheduled.
SimulationResult simulate(const SimulationRequest& request);

}  // namespace msvi
