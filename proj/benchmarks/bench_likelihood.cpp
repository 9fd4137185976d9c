#include <benchmark/benchmark.h>

#include "msvi/epa.hpp"
#include "msvi/mle.hpp"
#include "msvi/model.hpp"

namespace {

std::vector<double> observation(std::size_t d) {
  msvi::RandomStream rng(7, 0);
  std::vector<double> z(d);
  for (double& x : z) x = 1.0 / rng.exponential();
  return z;
}

msvi::SetPartition some_partition(const std::vector<double>& z) {
  msvi::RandomStream rng(8, 0);
  return msvi::epa_sample({0.5, 0.5, 1.0}, msvi::distance_matrix(z), rng).partition;
}

void BM_StLoglikLogistic(benchmark::State& state) {
  const auto z = observation(static_cast<std::size_t>(state.range(0)));
  const auto part = some_partition(z);
  const msvi::ModelParams p = msvi::LogisticParams{0.6};
  for (auto _ : state) benchmark::DoNotOptimize(msvi::st_loglik(p, z, part));
}
BENCHMARK(BM_StLoglikLogistic)->Arg(10)->Arg(60);

void BM_StLoglikBrownResnick(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto z = observation(d);
  const auto part = some_partition(z);
  msvi::RandomStream rng(9, 0);
  std::vector<msvi::Site> sites(d);
  for (auto& s : sites) s = {rng.uniform(), rng.uniform()};
  msvi::BrownResnickParams br;
  br.range = 1.5;
  br.smoothness = 1.5;
  br.setup = msvi::BrownResnickSetup::make(sites);
  const msvi::ModelParams p = br;
  for (auto _ : state) {
    msvi::StLikelihood lik(p, z);
    benchmark::DoNotOptimize(lik.loglik_grad(part).value);
  }
}
BENCHMARK(BM_StLoglikBrownResnick)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_LogisticFullLoglik(benchmark::State& state) {
  const auto z = observation(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(msvi::logistic_full_loglik(msvi::LogisticParams{0.6}, z));
  }
}
BENCHMARK(BM_LogisticFullLoglik)->Arg(10)->Arg(60);

}  // namespace
