#include <gtest/gtest.h>

#include <cmath>

#include "msvi/error.hpp"
#include "msvi/simulate.hpp"

using namespace msvi;

namespace {

double empirical_cdf(const std::vector<std::vector<double>>& obs, const std::vector<double>& z) {
  std::size_t hit = 0;
  for (const auto& x : obs) {
    bool below = true;
    for (std::size_t i = 0; i < z.size(); ++i) below = below && x[i] <= z[i];
    hit += below ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(obs.size());
}

void expect_cdf(const ModelParams& p, const std::vector<std::vector<double>>& obs,
                const std::vector<double>& z) {
  const double prob = std::exp(-exponent_measure(p, z));
  const double se = std::sqrt(prob * (1 - prob) / static_cast<double>(obs.size()));
  EXPECT_NEAR(empirical_cdf(obs, z), prob, 4 * se);
}

}  // namespace

TEST(SampleLogistic, JointAndMarginalDistribution) {
  RandomStream rng(1, 0);
  const LogisticParams p{0.4};
  const auto obs = sample_logistic(p, 3, 20000, rng);
  ASSERT_EQ(obs.size(), 20000u);
  expect_cdf(p, obs, {1.0, 1.0, 1.0});
  expect_cdf(p, obs, {0.5, 2.0, 1.5});
  expect_cdf(p, obs, {1.0, 1e300, 1e300});
  expect_cdf(p, obs, {1e300, 3.0, 1e300});
}

TEST(SampleLogistic, IndependenceCase) {
  RandomStream rng(2, 0);
  const LogisticParams p{1.0};
  const auto obs = sample_logistic(p, 2, 20000, rng);
  expect_cdf(p, obs, {1.0, 2.0});
}

TEST(SampleBrownResnick, JointDistributionAndPartitions) {
  BrownResnickParams p;
  p.range = 1.5;
  p.smoothness = 1.2;
  p.setup = BrownResnickSetup::make({{0, 0}, {1, 0}, {0.5, 0.8}});
  RandomStream rng(3, 0);
  const auto s = sample_brown_resnick(p, 10000, rng, true);
  ASSERT_EQ(s.partitions.size(), 10000u);
  expect_cdf(p, s.observations, {1.0, 1.0, 1.0});
  expect_cdf(p, s.observations, {0.7, 2.0, 1.2});
  expect_cdf(p, s.observations, {2.0, 1e300, 1e300});
  for (const auto& part : s.partitions) EXPECT_EQ(part.dim(), 3u);
}

TEST(EmpiricalPartition, GroupsEqualIds) {
  const std::vector<std::uint64_t> ids{5, 5, 2, 9, 2};
  EXPECT_EQ(empirical_partition(ids).to_string(), "1,2|3,5|4");
}

TEST(Simulate, ReproducibleAndPrefixStable) {
  SimulationRequest req;
  req.params = LogisticParams{0.6};
  req.sites = {{0, 0}, {1, 0}, {2, 0}};
  req.n = 50;
  req.seed = 99;
  const auto a = simulate(req);
  const auto b = simulate(req);
  EXPECT_EQ(a.data.observations(), b.data.observations());
  req.n = 20;
  const auto c = simulate(req);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(std::vector<double>(c.data.observation(i).begin(), c.data.observation(i).end()),
              a.data.observations()[i]);
  }
  req.seed = 100;
  EXPECT_NE(simulate(req).data.observations()[0], a.data.observations()[0]);
}

TEST(Simulate, RejectsPartitionsForLogistic) {
  SimulationRequest req;
  req.params = LogisticParams{0.6};
  req.sites = {{0, 0}, {1, 0}};
  req.record_partitions = true;
  EXPECT_THROW(simulate(req), DomainError);
}
