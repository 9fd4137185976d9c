#include <benchmark/benchmark.h>

#include "msvi/epa.hpp"

namespace {

std::vector<double> observation(std::size_t d) {
  msvi::RandomStream rng(3, 0);
  std::vector<double> z(d);
  for (double& x : z) x = 1.0 / rng.exponential();
  return z;
}

void BM_EpaSample(benchmark::State& state) {
  const auto dist = msvi::distance_matrix(observation(static_cast<std::size_t>(state.range(0))));
  const msvi::EpaParams p{0.5, 0.5, 1.0};
  msvi::RandomStream rng(4, 0);
  for (auto _ : state) benchmark::DoNotOptimize(msvi::epa_sample(p, dist, rng).log_pmf);
}
BENCHMARK(BM_EpaSample)->Arg(5)->Arg(10)->Arg(50)->Arg(100);

void BM_EpaLogPmfGrad(benchmark::State& state) {
  const auto dist = msvi::distance_matrix(observation(static_cast<std::size_t>(state.range(0))));
  const msvi::EpaParams p{0.5, 0.5, 1.0};
  msvi::RandomStream rng(5, 0);
  const auto part = msvi::epa_sample(p, dist, rng).partition;
  for (auto _ : state) benchmark::DoNotOptimize(msvi::epa_log_pmf_grad(p, dist, part).grad);
}
BENCHMARK(BM_EpaLogPmfGrad)->Arg(10)->Arg(100);

}  // namespace
