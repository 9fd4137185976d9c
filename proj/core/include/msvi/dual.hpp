#pragma once

// Forward-mode dual numbers with a fixed number of tangent directions.
//
// Likelihood code is written once as templates over the scalar type and
// instantiated for `double` (values) and `Dual<N>` (values plus gradients with
// respect to N seeded parameters).

#include <array>
#include <cmath>
#include <cstddef>

namespace msvi {

template <std::size_t N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(double value, const std::array<double, N>& tangent)
      : v(value), d(tangent) {}

  /// Independent variable number `k`: value `x`, unit tangent e_k.
  static constexpr Dual variable(double x, std::size_t k) {
    Dual r(x);
    r.d[k] = 1.0;
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double q = v / o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) / o.v;
    v = q;
    return *this;
  }
};

/// Applies a scalar function with known derivative: f(x) = fx, f'(x) = dfx.
template <std::size_t N>
constexpr Dual<N> chain(const Dual<N>& x, double fx, double dfx) {
  Dual<N> r(fx);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = dfx * x.d[i];
  return r;
}

template <std::size_t N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N>
Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N>
Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }

template <std::size_t N>
Dual<N> operator+(Dual<N> a, double b) { a.v += b; return a; }
template <std::size_t N>
Dual<N> operator+(double a, Dual<N> b) { b.v += a; return b; }
template <std::size_t N>
Dual<N> operator-(Dual<N> a, double b) { a.v -= b; return a; }
template <std::size_t N>
Dual<N> operator-(double a, const Dual<N>& b) {
  Dual<N> r(a - b.v);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = -b.d[i];
  return r;
}
template <std::size_t N>
Dual<N> operator*(Dual<N> a, double b) {
  a.v *= b;
  for (auto& t : a.d) t *= b;
  return a;
}
template <std::size_t N>
Dual<N> operator*(double a, Dual<N> b) { return b * a; }
template <std::size_t N>
Dual<N> operator/(Dual<N> a, double b) {
  a.v /= b;
  for (auto& t : a.d) t /= b;
  return a;
}
template <std::size_t N>
Dual<N> operator/(double a, const Dual<N>& b) {
  const double q = a / b.v;
  return chain(b, q, -q / b.v);
}
template <std::size_t N>
Dual<N> operator-(const Dual<N>& a) { return chain(a, -a.v, -1.0); }

template <std::size_t N>
Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.v);
  return chain(x, e, e);
}
template <std::size_t N>
Dual<N> log(const Dual<N>& x) { return chain(x, std::log(x.v), 1.0 / x.v); }
template <std::size_t N>
Dual<N> log1p(const Dual<N>& x) {
  return chain(x, std::log1p(x.v), 1.0 / (1.0 + x.v));
}
template <std::size_t N>
Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.v);
  return chain(x, s, 0.5 / s);
}
template <std::size_t N>
Dual<N> pow(const Dual<N>& x, double p) {
  const double y = std::pow(x.v, p);
  return chain(x, y, p * std::pow(x.v, p - 1.0));
}
template <std::size_t N>
Dual<N> abs(const Dual<N>& x) { return x.v < 0 ? -x : x; }

inline double value(double x) { return x; }
template <std::size_t N>
double value(const Dual<N>& x) { return x.v; }

inline double tangent(double, std::size_t) { return 0.0; }
template <std::size_t N>
double tangent(const Dual<N>& x, std::size_t k) { return x.d[k]; }

template <class T>
inline constexpr std::size_t tangent_size_v = 0;
template <std::size_t N>
inline constexpr std::size_t tangent_size_v<Dual<N>> = N;

}  // namespace msvi
