#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "msvi/error.hpp"
#include "msvi/mvn.hpp"
#include "msvi/normal.hpp"

using namespace msvi;

namespace {

Matrix<double> corr3(double r12, double r13, double r23) {
  Matrix<double> c(3, 3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) c(i, i) = 1.0;
  c(0, 1) = c(1, 0) = r12;
  c(0, 2) = c(2, 0) = r13;
  c(1, 2) = c(2, 1) = r23;
  return c;
}

MvnResult run(std::vector<double> upper, Matrix<double> corr, MvnOptions opt = {}) {
  RandomStream rng(17, 0);
  return mvn_cdf(MvnProblem{std::move(upper), std::move(corr), opt}, rng);
}

}  // namespace

TEST(MvnCdf, TriOrthantProbabilities) {
  const auto a = run({0, 0, 0}, corr3(0.3, 0.5, 0.2));
  EXPECT_NEAR(a.probability, 0.20693689188408, 1e-4);
  const auto b = run({0, 0, 0}, corr3(-0.2, 0.4, 0.1));
  EXPECT_NEAR(b.probability, 0.14969498600368492, 1e-4);
}

TEST(MvnCdf, LowDimensionsAreExact) {
  Matrix<double> one(1, 1, 1.0);
  const auto p1 = run({0.7}, one);
  EXPECT_NEAR(p1.probability, std_normal_cdf(0.7), 1e-15);
  EXPECT_EQ(p1.error, 0.0);
  Matrix<double> two(2, 2, 1.0);
  two(0, 1) = two(1, 0) = 0.4;
  const auto p2 = run({0.3, -0.5}, two);
  EXPECT_NEAR(p2.probability, bivariate_normal_cdf(0.3, -0.5, 0.4), 1e-15);
}

TEST(MvnCdf, InfiniteLimitsAreMarginalized) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto p = run({0.2, inf, -0.4}, corr3(0.5, 0.3, 0.6));
  EXPECT_NEAR(p.probability, bivariate_normal_cdf(0.2, -0.4, 0.3), 1e-14);
}

TEST(MvnCdf, IndependentCoordinatesGiveProduct) {
  const std::size_t d = 6;
  Matrix<double> c(d, d, 0.0);
  std::vector<double> upper(d);
  double expect = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    c(i, i) = 1.0;
    upper[i] = -0.5 + 0.3 * static_cast<double>(i);
    expect *= std_normal_cdf(upper[i]);
  }
  EXPECT_NEAR(run(upper, c).probability, expect, 1e-10);
}

TEST(MvnCdf, EquicorrelatedAgainstOneDimensionalQuadrature) {
  // With correlation r, X_i = sqrt(r) W + sqrt(1-r) E_i, so
  // P(X <= b) = E_W[ prod_i Phi((b_i - sqrt(r) W) / sqrt(1 - r)) ].
  const std::size_t d = 5;
  const double r = 0.5;
  Matrix<double> c(d, d, r);
  for (std::size_t i = 0; i < d; ++i) c(i, i) = 1.0;
  const std::vector<double> upper{0.1, 0.5, -0.3, 1.2, 0.0};
  double expect = 0.0;
  const double h = 1e-3;
  for (double w = -9.0; w <= 9.0; w += h) {
    double prod = std_normal_pdf(w);
    for (double b : upper) prod *= std_normal_cdf((b - std::sqrt(r) * w) / std::sqrt(1 - r));
    expect += prod * h;
  }
  MvnOptions opt;
  opt.abs_accuracy = 1e-5;
  opt.max_points = 100000;
  const auto got = run(upper, c, opt);
  EXPECT_NEAR(got.probability, expect, 5e-5);
  EXPECT_LT(got.error, 1e-4);
}

TEST(MvnCdf, FixedBudgetIsReproducible) {
  MvnOptions opt{0.0, 256, 12};
  const auto a = run({0.1, 0.2, 0.3}, corr3(0.3, 0.5, 0.2), opt);
  const auto b = run({0.1, 0.2, 0.3}, corr3(0.3, 0.5, 0.2), opt);
  EXPECT_EQ(a.probability, b.probability);
}

TEST(MvnCdf, RejectsBadInput) {
  EXPECT_THROW(run({0, 0, 0}, corr3(0.99, -0.99, 0.99)), NumericDomainError);
  EXPECT_THROW(run({0, 0}, corr3(0.1, 0.1, 0.1)), DomainError);
  Matrix<double> big(41, 41, 0.0);
  for (std::size_t i = 0; i < 41; ++i) big(i, i) = 1.0;
  EXPECT_THROW(run(std::vector<double>(41, 0.0), big), DomainError);
}
