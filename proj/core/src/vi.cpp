#include "msvi/vi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "msvi/parallel.hpp"
#include "msvi/transform.hpp"

namespace msvi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kBatchStreamTag = ~std::uint64_t{0};

bool wants_model(IwaeParts p) { return p == IwaeParts::model_grad || p == IwaeParts::all; }
bool wants_epa(IwaeParts p) { return p == IwaeParts::epa_grad || p == IwaeParts::all; }

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

IwaeEstimate estimate_observation(const ModelParams& model, const EpaParams& epa,
                                  std::span<const double> z, const DistanceMatrix& dist,
                                  std::size_t M, RandomStream& rng, IwaeParts parts) {
  if (M < 1) throw DomainError("M must be at least 1");
  epa.validate();
  if (dist.dim() != z.size()) throw DomainError("distance matrix does not match observation");
  StLikelihood lik(model, z);
  const std::size_t k = num_params(kind_of(model));

  std::vector<double> log_w(M);
  std::vector<ValueGrad> model_grads(wants_model(parts) ? M : 0);
  std::vector<std::array<double, 3>> scores(wants_epa(parts) ? M : 0);
  for (std::size_t m = 0; m < M; ++m) {
    const EpaDraw draw = epa_sample(epa, dist, rng);
    double ll;
    if (wants_model(parts)) {
      model_grads[m] = lik.loglik_grad(draw.partition);
      ll = model_grads[m].value;
    } else {
      ll = lik(draw.partition);
    }
    if (wants_epa(parts)) scores[m] = epa_log_pmf_grad(epa, dist, draw.partition).grad;
    log_w[m] = ll - draw.log_pmf;
  }

  IwaeEstimate out;
  out.grad_model.assign(k, 0.0);
  const double top = *std::max_element(log_w.begin(), log_w.end());
  if (top == -kInf || std::isnan(top)) {
    out.value = top;
    out.finite = false;
    return out;
  }
  std::vector<double> w(M);
  double total = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    w[m] = std::exp(log_w[m] - top);
    total += w[m];
  }
  for (double& x : w) x /= total;
  out.value = top + std::log(total) - std::log(static_cast<double>(M));

  for (std::size_t m = 0; m < M; ++m) {
    if (wants_model(parts) && w[m] > 0.0) {
      for (std::size_t j = 0; j < k; ++j) out.grad_model[j] += w[m] * model_grads[m].grad[j];
    }
    if (wants_epa(parts)) {
      for (std::size_t j = 0; j < 3; ++j) out.grad_epa[j] += (out.value - w[m]) * scores[m][j];
    }
  }
  out.finite = std::isfinite(out.value) &&
               std::all_of(out.grad_model.begin(), out.grad_model.end(),
                           [](double x) { return std::isfinite(x); }) &&
               std::all_of(out.grad_epa.begin(), out.grad_epa.end(),
                           [](double x) { return std::isfinite(x); });
  return out;
}

double iwae_estimate(const ModelParams& model, const EpaParams& epa, std::span<const double> z,
                     std::size_t M, RandomStream& rng) {
  return estimate_observation(model, epa, z, distance_matrix(z), M, rng, IwaeParts::value).value;
}

std::vector<double> grad_theta_estimate(const ModelParams& model, const EpaParams& epa,
                                        std::span<const double> z, std::size_t M,
                                        RandomStream& rng) {
  if (const auto* p = std::get_if<LogisticParams>(&model); p && p->theta == 1.0) {
    throw DomainError("grad_theta_estimate: theta = 1 is on the boundary");
  }
  return estimate_observation(model, epa, z, distance_matrix(z), M, rng, IwaeParts::model_grad)
      .grad_model;
}

std::array<double, 3> grad_phi_estimate(const ModelParams& model, const EpaParams& epa,
                                        std::span<const double> z, std::size_t M,
                                        RandomStream& rng) {
  return estimate_observation(model, epa, z, distance_matrix(z), M, rng, IwaeParts::epa_grad)
      .grad_epa;
}

void VIConfig::validate(std::size_t n) const {
  if (M < 1) throw DomainError("M must be at least 1");
  if (R < 1) throw DomainError("R must be at least 1");
  if (!(lr_theta >= 0.0) || !(lr_phi >= 0.0) || !std::isfinite(lr_theta) ||
      !std::isfinite(lr_phi)) {
    throw DomainError("learning rates must be finite and non-negative");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("momentum must lie in [0, 1)");
  if (batch > n) {
    throw DomainError(fmt::format("batch size {} exceeds the {} observations", batch, n));
  }
  if (!(tail_fraction >= 0.0 && tail_fraction < 1.0)) {
    throw DomainError("tail_fraction must lie in [0, 1)");
  }
  if (threads < 1) throw DomainError("threads must be at least 1");
  init_epa.validate();
}

FitTrace fit(const SpatialDataset& data, const VIConfig& config) {
  const std::size_t n = data.replicates();
  config.validate(n);
  validate(config.init_model, data.dim());
  const std::size_t batch = config.batch == 0 ? n : config.batch;
  const ModelParams& like = config.init_model;

  std::vector<double> u = unconstrain(like);
  std::vector<double> velocity(u.size(), 0.0);
  std::array<double, 3> phi = unconstrain(config.init_epa);

  std::vector<DistanceMatrix> dists;
  if (config.distance == DistanceKind::observation) {
    dists.reserve(n);
    for (std::size_t i = 0; i < n; ++i) dists.push_back(distance_matrix(data.observation(i)));
  } else {
    dists.push_back(site_distance_matrix(data.sites()));
  }

  FitTrace trace;
  trace.kind = kind_of(like);
  trace.rows.reserve(config.R);
  const std::size_t max_skipped = config.R / 10;

  ThreadPool pool(config.threads);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t pos = 0;
  std::uint64_t epoch = 0;
  std::vector<std::size_t> members(batch);
  std::vector<IwaeEstimate> results(batch);
  const double scale = static_cast<double>(n) / static_cast<double>(batch);
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t r = 1; r <= config.R; ++r) {
    if (batch < n) {
      if (pos == 0 || pos + batch > n) {
        auto rng = RandomStream::derive(config.seed, {kBatchStreamTag, epoch++});
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        pos = 0;
      }
      std::copy_n(order.begin() + static_cast<std::ptrdiff_t>(pos), batch, members.begin());
      std::sort(members.begin(), members.end());
      pos += batch;
    } else {
      members = order;
    }

    const ModelParams model = constrain(like, u);
    const EpaParams epa = constrain_epa(phi);
    pool.parallel_for(batch, [&](std::size_t b) {
      const std::size_t i = members[b];
      auto rng = RandomStream::derive(config.seed, {r, i});
      const DistanceMatrix& dist = dists.size() == 1 ? dists[0] : dists[i];
      try {
        results[b] = estimate_observation(model, epa, data.observation(i), dist, config.M, rng);
      } catch (const NumericDomainError&) {
        results[b] = IwaeEstimate{};
        results[b].value = std::numeric_limits<double>::quiet_NaN();
        results[b].finite = false;
      }
    });

    TraceRow row;
    row.iter = r;
    bool finite = true;
    std::vector<double> g_model(u.size(), 0.0);
    std::array<double, 3> g_epa{};
    double iwae = 0.0;
    for (const auto& res : results) {
      finite = finite && res.finite;
      if (!finite) break;
      iwae += res.value;
      for (std::size_t j = 0; j < u.size(); ++j) g_model[j] += res.grad_model[j];
      for (std::size_t j = 0; j < 3; ++j) g_epa[j] += res.grad_epa[j];
    }
    if (finite) {
      for (double& g : g_model) g *= scale;
      for (double& g : g_epa) g *= scale;
      const std::vector<double> gu = unconstrained_gradient(model, g_model);
      const std::array<double, 3> gphi = unconstrained_gradient(epa, g_epa);
      for (std::size_t j = 0; j < u.size(); ++j) {
        velocity[j] = config.momentum * velocity[j] + config.lr_theta * gu[j];
        u[j] += velocity[j];
      }
      for (std::size_t j = 0; j < 3; ++j) phi[j] += config.lr_phi * gphi[j];
      row.iwae = iwae * scale;
      row.grad_norm_theta = norm(gu);
      row.grad_norm_phi = norm(gphi);
    } else {
      row.iwae = std::numeric_limits<double>::quiet_NaN();
      row.skipped = true;
      ++trace.skipped;
    }
    trace.final_model = constrain(like, u);
    trace.final_epa = constrain_epa(phi);
    row.model = param_values(trace.final_model);
    row.epa = trace.final_epa;
    if (config.record_wall_time) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             start)
                        .count();
    }
    trace.rows.push_back(std::move(row));
    if (trace.skipped > max_skipped) {
      trace.estimate = trace.final_model;
      throw FitAborted(fmt::format("fit aborted: {} of {} iterations skipped after non-finite "
                                   "estimates (limit {})",
                                   trace.skipped, r, max_skipped),
                       std::move(trace));
    }
  }

  trace.estimate = trace.final_model;
  const auto tail = static_cast<std::size_t>(std::ceil(config.tail_fraction *
                                                       static_cast<double>(config.R)));
  if (tail > 0) {
    std::vector<double> avg(u.size(), 0.0);
    std::size_t used = 0;
    for (std::size_t i = trace.rows.size() - tail; i < trace.rows.size(); ++i) {
      if (trace.rows[i].skipped) continue;
      for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += trace.rows[i].model[j];
      ++used;
    }
    if (used > 0) {
      for (double& a : avg) a /= static_cast<double>(used);
      trace.estimate = with_param_values(like, avg);
    }
  }
  return trace;
}

}  // namespace msvi
