#include <gtest/gtest.h>

#include <cmath>

#include "msvi/error.hpp"
#include "msvi/simulate.hpp"
#include "msvi/vi.hpp"

using namespace msvi;

namespace {

SpatialDataset logistic_data(double theta, std::size_t dim, std::size_t n, std::uint64_t seed) {
  SimulationRequest req;
  req.params = LogisticParams{theta};
  for (std::size_t i = 0; i < dim; ++i) req.sites.push_back({static_cast<double>(i), 0.0});
  req.n = n;
  req.seed = seed;
  return simulate(req).data;
}

VIConfig small_config() {
  VIConfig c;
  c.M = 5;
  c.R = 60;
  c.lr_theta = 2e-4;
  c.lr_phi = 1e-5;
  c.seed = 4;
  return c;
}

}  // namespace

TEST(Iwae, SingleSampleIsUnbiasedForLikelihood) {
  const ModelParams model = LogisticParams{0.5};
  const EpaParams epa{0.8, 0.3, 1.0};
  const std::vector<double> z{0.8, 1.9, 1.1};
  const double lik = std::exp(full_loglik_enum(model, z));
  RandomStream rng(8, 0);
  const int draws = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double w = std::exp(iwae_estimate(model, epa, z, 1, rng));
    sum += w;
    sum2 += w * w;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, lik, 4 * se);
}

TEST(Iwae, BoundIsBelowLogLikelihoodOnAverage) {
  const ModelParams model = LogisticParams{0.5};
  const EpaParams epa{0.8, 0.3, 1.0};
  const std::vector<double> z{0.8, 1.9, 1.1, 0.4};
  const double ll = full_loglik_enum(model, z);
  RandomStream rng(9, 0);
  double m1 = 0.0, m10 = 0.0;
  for (int i = 0; i < 4000; ++i) {
    m1 += iwae_estimate(model, epa, z, 1, rng) / 4000;
    m10 += iwae_estimate(model, epa, z, 10, rng) / 4000;
  }
  EXPECT_LT(m1, m10);
  EXPECT_LT(m10, ll);
}

TEST(Iwae, EstimatesShareDrawsAndAreDeterministic) {
  const ModelParams model = LogisticParams{0.7};
  const EpaParams epa{0.5, 0.5, 1.0};
  const std::vector<double> z{0.8, 1.9, 1.1, 0.4};
  const auto dist = distance_matrix(z);
  RandomStream a(1, 2), b(1, 2), c(1, 2);
  const auto all = estimate_observation(model, epa, z, dist, 8, a);
  EXPECT_EQ(all.value, iwae_estimate(model, epa, z, 8, b));
  EXPECT_EQ(all.grad_model, grad_theta_estimate(model, epa, z, 8, c));
  EXPECT_TRUE(all.finite);
  EXPECT_THROW(grad_theta_estimate(LogisticParams{1.0}, epa, z, 8, a), DomainError);
}

TEST(Fit, TraceShapeAndThreadInvariance) {
  const auto data = logistic_data(0.8, 4, 12, 1);
  auto config = small_config();
  const auto t1 = fit(data, config);
  ASSERT_EQ(t1.rows.size(), config.R);
  EXPECT_EQ(t1.rows.front().iter, 1u);
  EXPECT_EQ(t1.rows.back().iter, config.R);
  EXPECT_EQ(t1.skipped, 0u);
  for (const auto& row : t1.rows) EXPECT_EQ(row.wall_ms, 0.0);
  EXPECT_EQ(param_values(t1.final_model), t1.rows.back().model);
  config.threads = 3;
  const auto t3 = fit(data, config);
  for (std::size_t r = 0; r < config.R; ++r) {
    EXPECT_EQ(t1.rows[r].model, t3.rows[r].model);
    EXPECT_EQ(t1.rows[r].iwae, t3.rows[r].iwae);
  }
}

TEST(Fit, MiniBatchAndTailAverage) {
  const auto data = logistic_data(0.8, 4, 12, 2);
  auto config = small_config();
  config.batch = 5;
  config.tail_fraction = 0.5;
  const auto t = fit(data, config);
  double mean = 0.0;
  for (std::size_t r = 30; r < 60; ++r) mean += t.rows[r].model[0] / 30;
  EXPECT_NEAR(param_values(t.estimate)[0], mean, 1e-12);
}

TEST(Fit, ConfigValidation) {
  const auto data = logistic_data(0.8, 3, 5, 3);
  auto c = small_config();
  c.lr_theta = -1e-3;
  EXPECT_THROW(fit(data, c), DomainError);
  c = small_config();
  c.M = 0;
  EXPECT_THROW(fit(data, c), DomainError);
  c = small_config();
  c.batch = 6;
  EXPECT_THROW(fit(data, c), DomainError);
  c = small_config();
  c.init_epa = EpaParams{0.5, 0.0, 1.0};
  EXPECT_THROW(fit(data, c), DomainError);
}
