#include <benchmark/benchmark.h>

#include "msvi/mvn.hpp"

namespace {

void BM_MvnCdfFixedBudget(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  msvi::Matrix<double> corr(d, d, 0.4);
  for (std::size_t i = 0; i < d; ++i) corr(i, i) = 1.0;
  msvi::MvnProblem problem{std::vector<double>(d, 0.3), corr, {0.0, 256, 12}};
  msvi::RandomStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(msvi::mvn_cdf(problem, rng).probability);
}
BENCHMARK(BM_MvnCdfFixedBudget)->Arg(3)->Arg(5)->Arg(10)->Arg(20);

}  // namespace
