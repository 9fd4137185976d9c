#pragma once

#include <cmath>
#include <numbers>

#include "msvi/dual.hpp"

namespace msvi {

/// Standard normal distribution function Phi(x); exact at +-inf.
double std_normal_cdf(double x) noexcept;

/// log Phi(x), accurate far into the lower tail (asymptotic series below -30).
double log_std_normal_cdf(double x) noexcept;

/// Standard normal density.
inline double std_normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Inverse of Phi on (0, 1) (Wichura AS241, relative accuracy ~1e-16).
/// Returns -inf / +inf at 0 / 1.
double std_normal_quantile(double p) noexcept;

/// P(X <= h, Y <= k) for a standard bivariate normal with correlation r.
/// Drezner-Wesolowsky / Genz Gauss-Legendre scheme, accurate to ~1e-15.
double bivariate_normal_cdf(double h, double k, double r) noexcept;

/// Bivariate standard normal density.
double bivariate_normal_pdf(double h, double k, double r) noexcept;

// Scalar-generic wrappers used by the templated likelihood kernels.

inline double norm_cdf(double x) { return std_normal_cdf(x); }
inline double log_norm_cdf(double x) { return log_std_normal_cdf(x); }
inline double norm_quantile(double p) { return std_normal_quantile(p); }
inline double bvn_cdf(double h, double k, double r) {
  return bivariate_normal_cdf(h, k, r);
}

template <std::size_t N>
Dual<N> norm_cdf(const Dual<N>& x) {
  return chain(x, std_normal_cdf(x.v), std_normal_pdf(x.v));
}

template <std::size_t N>
Dual<N> log_norm_cdf(const Dual<N>& x) {
  const double lc = log_std_normal_cdf(x.v);
  // d/dx log Phi = phi / Phi, evaluated in log space for the lower tail.
  const double logpdf = -0.5 * x.v * x.v - 0.5 * std::log(2.0 * std::numbers::pi);
  return chain(x, lc, std::exp(logpdf - lc));
}

template <std::size_t N>
Dual<N> norm_quantile(const Dual<N>& p) {
  const double q = std_normal_quantile(p.v);
  if (!std::isfinite(q)) return Dual<N>(q);
  return chain(p, q, 1.0 / std_normal_pdf(q));
}

template <std::size_t N>
Dual<N> bvn_cdf(const Dual<N>& h, const Dual<N>& k, const Dual<N>& r) {
  const double s = std::sqrt(std::max(1.0 - r.v * r.v, 1e-300));
  const double dh = std_normal_pdf(h.v) * std_normal_cdf((k.v - r.v * h.v) / s);
  const double dk = std_normal_pdf(k.v) * std_normal_cdf((h.v - r.v * k.v) / s);
  const double dr = bivariate_normal_pdf(h.v, k.v, r.v);
  Dual<N> out(bivariate_normal_cdf(h.v, k.v, r.v));
  for (std::size_t i = 0; i < N; ++i) {
    out.d[i] = dh * h.d[i] + dk * k.d[i] + dr * r.d[i];
  }
  return out;
}

}  // namespace msvi
