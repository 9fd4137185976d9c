#include "msvi/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "msvi/error.hpp"
#include "msvi/parallel.hpp"
#include "msvi/transform.hpp"

namespace msvi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// log of the sum over set partitions of n items into m blocks of the
/// product of block weights c_k, for all n, m <= dim.
std::vector<std::vector<double>> log_block_sums(double theta, std::size_t dim) {
  std::vector<double> log_c(dim + 1, 0.0);
  for (std::size_t k = 1; k <= dim; ++k) {
    double v = (1.0 - static_cast<double>(k)) * std::log(theta);
    for (std::size_t j = 1; j < k; ++j) v += std::log(static_cast<double>(j) - theta);
    log_c[k] = v;
  }
  std::vector<std::vector<double>> log_binom(dim, std::vector<double>(dim, 0.0));
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      log_binom[a][b] = std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
    }
  }
  std::vector<std::vector<double>> lb(dim + 1, std::vector<double>(dim + 1, -kInf));
  lb[0][0] = 0.0;
  for (std::size_t n = 1; n <= dim; ++n) {
    for (std::size_t m = 1; m <= n; ++m) {
      double acc = -kInf;
      for (std::size_t k = 1; k + m - 1 <= n; ++k) {
        const double rest = lb[n - k][m - 1];
        if (rest == -kInf) continue;
        acc = log_add(acc, log_binom[n - 1][k - 1] + log_c[k] + rest);
      }
      lb[n][m] = acc;
    }
  }
  return lb;
}

double logistic_loglik_with(double theta, const std::vector<double>& lb_dim,
                            std::span<const double> z) {
  const std::size_t dim = z.size();
  double sum_log_z = 0.0;
  for (double x : z) sum_log_z += std::log(x);
  if (theta == 1.0) {
    double out = -2.0 * sum_log_z;
    for (double x : z) out -= 1.0 / x;
    return out;
  }
  double top = -kInf;
  std::vector<double> terms(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    terms[i] = -std::log(z[i]) / theta;
    top = std::max(top, terms[i]);
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  const double log_s = std::log(s) + top;
  double acc = -kInf;
  for (std::size_t m = 1; m <= dim; ++m) {
    acc = log_add(acc, lb_dim[m] + (theta * static_cast<double>(m) - static_cast<double>(dim)) *
                                       log_s);
  }
  return -std::exp(theta * log_s) - (1.0 / theta + 1.0) * sum_log_z + acc;
}

void check_observation(std::span<const double> z) {
  if (z.empty() || z.size() > kMaxLogisticMleDim) {
    throw DomainError(
        fmt::format("logistic full likelihood supports 1 <= D <= {}", kMaxLogisticMleDim));
  }
  for (double x : z) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw DomainError("logistic full likelihood needs positive finite observations");
    }
  }
}

}  // namespace

double logistic_full_loglik(const LogisticParams& params, std::span<const double> z) {
  params.validate();
  check_observation(z);
  const auto lb = log_block_sums(params.theta, z.size());
  return logistic_loglik_with(params.theta, lb[z.size()], z);
}

double logistic_full_loglik(const LogisticParams& params, const SpatialDataset& data) {
  params.validate();
  const std::size_t dim = data.dim();
  if (dim > kMaxLogisticMleDim) {
    throw DomainError(
        fmt::format("logistic full likelihood supports D <= {}", kMaxLogisticMleDim));
  }
  const auto lb = log_block_sums(params.theta, dim);
  double total = 0.0;
  for (const auto& z : data.observations()) total += logistic_loglik_with(params.theta, lb[dim], z);
  return total;
}

double full_loglik(const ModelParams& params, const SpatialDataset& data, std::size_t threads) {
  if (const auto* lp = std::get_if<LogisticParams>(&params)) {
    return logistic_full_loglik(*lp, data);
  }
  validate(params, data.dim());
  if (data.dim() > kMaxBrownResnickMleDim) {
    throw DomainError(fmt::format("Brown-Resnick full likelihood needs D <= {} ({} partitions "
                                  "at D = {})",
                                  kMaxBrownResnickMleDim,
                                  bell_number(static_cast<int>(data.dim())).str(), data.dim()));
  }
  std::vector<double> parts(data.replicates());
  ThreadPool pool(threads);
  pool.parallel_for(parts.size(), [&](std::size_t i) {
    parts[i] = full_loglik_enum(params, data.observation(i));
  });
  return std::accumulate(parts.begin(), parts.end(), 0.0);
}

OptimResult golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                               double tolerance, std::size_t max_evaluations) {
  if (!(lo < hi)) throw DomainError("golden_section_max: need lo < hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  OptimResult out;
  auto eval = [&](double x) {
    ++out.evaluations;
    const double v = f(x);
    return std::isnan(v) ? -kInf : v;
  };
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tolerance && out.evaluations + 2 < max_evaluations) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  out.converged = b - a <= tolerance;
  double best_x = fc >= fd ? c : d;
  double best = std::max(fc, fd);
  for (double x : {lo, hi}) {
    const double v = eval(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  out.x = {best_x};
  out.value = best;
  return out;
}

OptimResult nelder_mead_max(const Objective& f, std::vector<double> x0, double step,
                            double tolerance, std::size_t max_evaluations) {
  const std::size_t k = x0.size();
  if (k == 0) throw DomainError("nelder_mead_max: empty starting point");
  OptimResult out;
  auto eval = [&](const std::vector<double>& x) {
    ++out.evaluations;
    const double v = f(x);
    return std::isnan(v) ? -kInf : v;
  };
  std::vector<std::vector<double>> simplex(k + 1, x0);
  for (std::size_t j = 0; j < k; ++j) simplex[j + 1][j] += step;
  std::vector<double> values(k + 1);
  for (std::size_t i = 0; i <= k; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> idx(k + 1);
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        d = std::max(d, std::abs(simplex[idx[i]][j] - simplex[idx[0]][j]));
      }
    }
    return d;
  };
  auto point = [&](const std::vector<double>& centre, const std::vector<double>& worst,
                   double t) {
    std::vector<double> x(k);
    for (std::size_t j = 0; j < k; ++j) x[j] = centre[j] + t * (worst[j] - centre[j]);
    return x;
  };

  while (true) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    if (values[idx[0]] > -kInf && diameter() < tolerance) {
      out.converged = true;
      break;
    }
    if (out.evaluations >= max_evaluations) break;

    const std::size_t worst = idx[k];
    std::vector<double> centre(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) centre[j] += simplex[idx[i]][j] / static_cast<double>(k);
    }
    const auto xr = point(centre, simplex[worst], -1.0);
    const double fr = eval(xr);
    if (fr > values[idx[0]]) {
      const auto xe = point(centre, simplex[worst], -2.0);
      const double fe = eval(xe);
      if (fe > fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
      continue;
    }
    if (fr > values[idx[k - 1]]) {
      simplex[worst] = xr;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr > values[worst];
    const auto xc = point(centre, outside ? xr : simplex[worst], 0.5);
    const double fc = eval(xc);
    if (fc > std::max(fr, values[worst])) {
      simplex[worst] = xc;
      values[worst] = fc;
      continue;
    }
    const auto& best = simplex[idx[0]];
    for (std::size_t i = 1; i <= k; ++i) {
      auto& x = simplex[idx[i]];
      for (std::size_t j = 0; j < k; ++j) x[j] = best[j] + 0.5 * (x[j] - best[j]);
      values[idx[i]] = eval(x);
    }
  }
  out.x = simplex[idx[0]];
  out.value = values[idx[0]];
  return out;
}

MleBounds MleBounds::defaults(ModelKind kind) {
  if (kind == ModelKind::logistic) return {{0.01}, {1.0}};
  return {{0.01, 0.01}, {50.0, 1.99}};
}

MleResult fit_mle(const SpatialDataset& data, const ModelParams& start, const MleBounds& bounds,
                  const MleOptions& options) {
  const ModelKind kind = kind_of(start);
  const std::size_t k = num_params(kind);
  if (bounds.lower.size() != k || bounds.upper.size() != k) {
    throw DomainError("fit_mle: bounds have the wrong length");
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (!(bounds.lower[j] < bounds.upper[j])) throw DomainError("fit_mle: empty bound interval");
  }
  MleResult result;
  if (kind == ModelKind::logistic) {
    if (data.dim() > kMaxLogisticMleDim) {
      throw DomainError(fmt::format("logistic MLE supports D <= {}", kMaxLogisticMleDim));
    }
    const double lo = std::max(bounds.lower[0], std::numeric_limits<double>::min());
    const double hi = std::min(bounds.upper[0], 1.0);
    auto f = [&](double theta) { return logistic_full_loglik(LogisticParams{theta}, data); };
    const auto opt = golden_section_max(f, lo, hi, options.tolerance, options.max_evaluations);
    result.params = LogisticParams{opt.x[0]};
    result.loglik = opt.value;
    result.evaluations = opt.evaluations;
    result.converged = opt.converged && std::isfinite(opt.value);
  } else {
    validate(start, data.dim());
    if (data.dim() > kMaxBrownResnickMleDim) {
      throw DomainError(
          fmt::format("Brown-Resnick MLE supports D <= {}", kMaxBrownResnickMleDim));
    }
    auto f = [&](std::span<const double> u) {
      const ModelParams p = constrain(start, u);
      const auto values = param_values(p);
      for (std::size_t j = 0; j < k; ++j) {
        if (values[j] < bounds.lower[j] || values[j] > bounds.upper[j]) return -kInf;
      }
      try {
        return full_loglik(p, data, options.threads);
      } catch (const NumericDomainError&) {
        return -kInf;
      }
    };
    auto opt = nelder_mead_max(f, unconstrain(start), 0.5, options.tolerance,
                               options.max_evaluations);
    std::size_t evaluations = opt.evaluations;
    if (opt.converged && evaluations < options.max_evaluations) {
      // Restart from the optimum to guard against a collapsed simplex.
      auto again = nelder_mead_max(f, opt.x, 0.1, options.tolerance,
                                   options.max_evaluations - evaluations);
      evaluations += again.evaluations;
      if (again.value >= opt.value) {
        again.converged = again.converged && opt.converged;
        opt = std::move(again);
      }
    }
    result.params = constrain(start, opt.x);
    result.loglik = opt.value;
    result.evaluations = evaluations;
    result.converged = opt.converged && std::isfinite(opt.value);
  }
  if (!std::isfinite(result.loglik)) {
    result.converged = false;
    result.message = "objective was -inf at every probe";
  } else if (!result.converged) {
    result.message = "evaluation budget exhausted before convergence";
  }
  return result;
}

}  // namespace msvi
