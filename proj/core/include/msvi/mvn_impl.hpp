#pragma once

// Scalar-generic Genz integrator; instantiated for double and Dual<N>.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "msvi/error.hpp"
#include "msvi/mvn.hpp"
#include "msvi/normal.hpp"

namespace msvi::detail {

template <class T>
struct MvnValue {
  T probability;
  double error = 0.0;
};

/// sqrt of the first 40 primes: Richtmyer lattice generators.
const std::array<double, kMaxMvnDim>& richtmyer_generators();

template <class T>
MvnValue<T> mvn_cdf_t(const std::vector<T>& upper, const Matrix<T>& corr,
                      const MvnOptions& options, RandomStream& rng) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = upper.size();
  if (n > kMaxMvnDim) {
    throw DomainError(fmt::format("mvn_cdf: dimension {} exceeds {}", n, kMaxMvnDim));
  }

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    const double b = value(upper[i]);
    if (std::isnan(b)) throw DomainError("mvn_cdf: NaN upper limit");
    if (b == -inf) return {T(0.0), 0.0};
    if (b != inf) keep.push_back(i);
  }
  const std::size_t m = keep.size();
  if (m == 0) return {T(1.0), 0.0};
  if (m == 1) return {norm_cdf(upper[keep[0]]), 0.0};
  if (m == 2) {
    return {bvn_cdf(upper[keep[0]], upper[keep[1]], corr(keep[0], keep[1])), 0.0};
  }

  // Most restrictive limits first.
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    return value(upper[a]) < value(upper[b]);
  });
  std::vector<T> b(m);
  Matrix<T> c(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    b[i] = upper[keep[i]];
    for (std::size_t j = 0; j < m; ++j) c(i, j) = corr(keep[i], keep[j]);
  }
  const auto chol = cholesky(c, 1e-10);
  if (!chol) throw NumericDomainError("mvn_cdf: correlation matrix is not positive semidefinite");
  const Matrix<T>& l = *chol;

  const std::size_t shifts = std::max<std::size_t>(options.shifts, 2);
  const std::size_t qdim = m - 1;
  std::vector<double> shift(shifts * qdim);
  for (double& s : shift) s = rng.uniform();
  const auto& gen = richtmyer_generators();

  constexpr double kTiny = 1e-300;
  constexpr double kAlmostOne = 1.0 - 1e-16;
  std::vector<T> y(qdim);
  auto integrand = [&](std::size_t point, const double* sh) -> T {
    T e = norm_cdf(b[0] / l(0, 0));
    T f = e;
    for (std::size_t i = 1; i < m; ++i) {
      const double raw = static_cast<double>(point) * gen[i - 1] + sh[i - 1];
      const double w = std::fabs(2.0 * (raw - std::floor(raw)) - 1.0);
      T u = w * e;
      if (value(u) < kTiny) u = T(kTiny);
      if (value(u) > kAlmostOne) u = T(kAlmostOne);
      y[i - 1] = norm_quantile(u);
      T s(0.0);
      for (std::size_t j = 0; j < i; ++j) s += l(i, j) * y[j];
      if (value(l(i, i)) > 0.0) {
        e = norm_cdf((b[i] - s) / l(i, i));
      } else {
        e = T(value(b[i] - s) >= 0.0 ? 1.0 : 0.0);
      }
      f *= e;
      if (value(f) == 0.0) break;
    }
    return f;
  };

  std::vector<T> sums(shifts, T(0.0));
  std::size_t used = 0;
  std::size_t target = options.abs_accuracy > 0.0
                           ? std::min<std::size_t>(options.max_points, 256)
                           : options.max_points;
  target = std::max<std::size_t>(target, 1);
  T estimate(0.0);
  double error = 0.0;
  for (;;) {
    for (std::size_t s = 0; s < shifts; ++s) {
      for (std::size_t p = used + 1; p <= target; ++p) sums[s] += integrand(p, &shift[s * qdim]);
    }
    used = target;
    estimate = T(0.0);
    double mean = 0.0;
    for (std::size_t s = 0; s < shifts; ++s) {
      estimate += sums[s];
      mean += value(sums[s]);
    }
    estimate = estimate / static_cast<double>(shifts * used);
    mean /= static_cast<double>(shifts * used);
    double var = 0.0;
    for (std::size_t s = 0; s < shifts; ++s) {
      const double d = value(sums[s]) / static_cast<double>(used) - mean;
      var += d * d;
    }
    var /= static_cast<double>(shifts * (shifts - 1));
    error = 3.0 * std::sqrt(var);
    if (used >= options.max_points || error <= options.abs_accuracy) break;
    target = std::min(options.max_points, 2 * used);
  }
  return {estimate, error};
}

}  // namespace msvi::detail
