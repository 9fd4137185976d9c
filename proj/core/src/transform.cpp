#include "msvi/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "msvi/error.hpp"

namespace msvi {
namespace {

constexpr double kTiny = std::numeric_limits<double>::min();
constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

double sigmoid(double u) {
  const double s = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
  return std::clamp(s, kTiny, kBelowOne);
}

double logit(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(fmt::format("{} = {} has no unconstrained preimage", name, p));
  }
  return std::log(p) - std::log1p(-p);
}

double log_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(fmt::format("{} = {} has no unconstrained preimage", name, x));
  }
  return std::log(x);
}

void check_finite(std::span<const double> u) {
  for (double x : u) {
    if (!std::isfinite(x)) throw DomainError("unconstrained parameter is not finite");
  }
}

}  // namespace

std::vector<double> unconstrain(const ModelParams& params) {
  if (const auto* p = std::get_if<LogisticParams>(&params)) {
    return {logit(p->theta, "theta")};
  }
  const auto& br = std::get<BrownResnickParams>(params);
  return {log_positive(br.range, "range"), logit(br.smoothness / 2.0, "smoothness / 2")};
}

ModelParams constrain(const ModelParams& like, std::span<const double> u) {
  check_finite(u);
  if (u.size() != num_params(kind_of(like))) {
    throw DomainError("constrain: wrong number of parameters");
  }
  if (std::holds_alternative<LogisticParams>(like)) return LogisticParams{sigmoid(u[0])};
  auto br = std::get<BrownResnickParams>(like);
  br.range = std::clamp(std::exp(u[0]), kTiny, std::numeric_limits<double>::max());
  br.smoothness = 2.0 * sigmoid(u[1]);
  return br;
}

std::vector<double> unconstrained_gradient(const ModelParams& params,
                                           std::span<const double> grad) {
  if (const auto* p = std::get_if<LogisticParams>(&params)) {
    return {grad[0] * p->theta * (1.0 - p->theta)};
  }
  const auto& br = std::get<BrownResnickParams>(params);
  return {grad[0] * br.range, grad[1] * br.smoothness * (1.0 - br.smoothness / 2.0)};
}

std::array<double, 3> unconstrain(const EpaParams& params) {
  params.validate();
  return {log_positive(params.alpha + params.delta, "alpha + delta"),
          logit(params.delta, "delta"), log_positive(params.rho, "rho")};
}

EpaParams constrain_epa(std::span<const double, 3> u) {
  check_finite(u);
  EpaParams p;
  p.delta = std::min(sigmoid(u[1]), kBelowOne);
  p.alpha = std::max(std::exp(u[0]), kTiny) - p.delta;
  if (!(p.alpha > -p.delta)) p.alpha = std::nextafter(-p.delta, 1.0);
  p.rho = std::clamp(std::exp(u[2]), kTiny, std::numeric_limits<double>::max());
  return p;
}

std::array<double, 3> unconstrained_gradient(const EpaParams& params,
                                             const std::array<double, 3>& grad) {
  const double dd = params.delta * (1.0 - params.delta);
  return {grad[0] * (params.alpha + params.delta), (grad[1] - grad[0]) * dd,
          grad[2] * params.rho};
}

}  // namespace msvi
