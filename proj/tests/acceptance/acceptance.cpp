// Acceptance checks. Usage: msvi_acceptance <criterion 1-12 | all>
// Prints one "PASS criterion N: ..." or "FAIL criterion N: ..." line each.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "msvi/cli/config.hpp"
#include "msvi/cli/runner.hpp"
#include "msvi/epa.hpp"
#include "msvi/mle.hpp"
#include "msvi/model.hpp"
#include "msvi/simulate.hpp"
#include "msvi/vi.hpp"

namespace {

using namespace msvi;

const double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, std::string what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "!! ") + std::move(what));
  }
};

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<double> frechet_vector(RandomStream& rng, std::size_t dim) {
  std::vector<double> z(dim);
  for (double& x : z) x = 1.0 / rng.exponential();
  return z;
}

std::vector<Site> unit_square_sites(std::size_t dim, RandomStream& rng) {
  std::vector<Site> sites(dim);
  for (auto& s : sites) s = {rng.uniform(), rng.uniform()};
  return sites;
}

BrownResnickParams brown_resnick(double range, double smoothness, std::vector<Site> sites) {
  BrownResnickParams p;
  p.range = range;
  p.smoothness = smoothness;
  p.setup = BrownResnickSetup::make(std::move(sites));
  return p;
}

SpatialDataset simulate_data(const ModelParams& params, std::vector<Site> sites, std::size_t n,
                             std::uint64_t seed) {
  SimulationRequest req;
  req.params = params;
  req.sites = std::move(sites);
  req.n = n;
  req.seed = seed;
  return simulate(req).data;
}

std::vector<Site> line_sites(std::size_t dim) {
  std::vector<Site> sites(dim);
  for (std::size_t i = 0; i < dim; ++i) sites[i] = {static_cast<double>(i), 0.0};
  return sites;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Every partition with its log q and log p(z, partition).
struct Enumerated {
  std::vector<double> log_q;
  std::vector<double> log_p;
};

Enumerated enumerate(const ModelParams& model, const EpaParams& epa, std::span<const double> z) {
  Enumerated e;
  const auto dist = distance_matrix(z);
  StLikelihood lik(model, z);
  for_each_partition(static_cast<int>(z.size()), [&](const SetPartition& part) {
    e.log_q.push_back(epa_log_pmf(epa, dist, part));
    e.log_p.push_back(lik(part));
  });
  return e;
}

// Exact two-sample bound: sum_{i,j} q_i q_j log((w_i + w_j) / 2).
double exact_bound_m2(const ModelParams& model, const EpaParams& epa, std::span<const double> z) {
  const auto e = enumerate(model, epa, z);
  double total = 0.0;
  for (std::size_t i = 0; i < e.log_q.size(); ++i) {
    for (std::size_t j = 0; j < e.log_q.size(); ++j) {
      const double lw_i = e.log_p[i] - e.log_q[i];
      const double lw_j = e.log_p[j] - e.log_q[j];
      const double hi = std::max(lw_i, lw_j);
      const double lse = hi + std::log(std::exp(lw_i - hi) + std::exp(lw_j - hi)) - std::log(2.0);
      total += std::exp(e.log_q[i] + e.log_q[j]) * lse;
    }
  }
  return total;
}

// 1. Logistic recursion against partition enumeration.
Outcome criterion1() {
  Outcome out;
  RandomStream rng(101, 0);
  for (int d = 2; d <= 8; ++d) {
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const LogisticParams p{0.02 + 0.98 * rng.uniform()};
      const auto z = frechet_vector(rng, static_cast<std::size_t>(d));
      worst = std::max(worst, rel_err(logistic_full_loglik(p, z), full_loglik_enum(p, z)));
    }
    out.check(worst < 1e-10, fmt::format("D={} max rel err {:.2e}", d, worst));
  }
  return out;
}

// 2. Partition distribution normalization and sampler frequencies.
Outcome criterion2() {
  Outcome out;
  RandomStream rng(202, 0);
  double worst = 0.0;
  for (int d = 1; d <= 6; ++d) {
    for (int rep = 0; rep < 20; ++rep) {
      const double delta = 0.99 * rng.uniform();
      const EpaParams p{-delta + 0.01 + 4.0 * rng.uniform(), delta, 0.05 + 3.0 * rng.uniform()};
      const auto dist = distance_matrix(frechet_vector(rng, static_cast<std::size_t>(d)));
      double total = 0.0;
      for_each_partition(d, [&](const SetPartition& part) {
        total += std::exp(epa_log_pmf(p, dist, part));
      });
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  out.check(worst < 1e-10, fmt::format("max |sum pmf - 1| = {:.2e} for D<=6", worst));

  const EpaParams p{0.7, 0.35, 0.9};
  const auto dist = distance_matrix(frechet_vector(rng, 5));
  const std::size_t draws = 100000;
  std::map<SetPartition, std::size_t> counts;
  RandomStream sampler(202, 1);
  for (std::size_t i = 0; i < draws; ++i) ++counts[epa_sample(p, dist, sampler).partition];
  double worst_z = 0.0;
  int outside = 0;
  for (const auto& part : enumerate_partitions(5)) {
    const double prob = std::exp(epa_log_pmf(p, dist, part));
    const double se = std::sqrt(prob * (1 - prob) / static_cast<double>(draws));
    const double freq = static_cast<double>(counts[part]) / static_cast<double>(draws);
    const double zscore = std::abs(freq - prob) / se;
    worst_z = std::max(worst_z, zscore);
    outside += zscore > 4.0 ? 1 : 0;
  }
  out.check(outside == 0, fmt::format("D=5 sampler: 52 partitions, max |z| {:.2f}", worst_z));
  return out;
}

// 3. Homogeneity of order -1 and the marginal constraint.
Outcome criterion3() {
  Outcome out;
  RandomStream rng(303, 0);
  for (int model = 0; model < 2; ++model) {
    double worst_h = 0.0;
    double worst_m = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t d = 2 + rng.below(5);
      ModelParams p;
      if (model == 0) {
        p = LogisticParams{0.05 + 0.95 * rng.uniform()};
      } else {
        p = brown_resnick(0.2 + 2.0 * rng.uniform(), 0.2 + 1.8 * rng.uniform(),
                          unit_square_sites(d, rng));
      }
      const auto z = frechet_vector(rng, d);
      const double a = std::exp(std::log(0.1) + std::log(100.0) * rng.uniform());
      std::vector<double> scaled(z);
      for (double& x : scaled) x *= a;
      worst_h = std::max(worst_h, rel_err(exponent_measure(p, scaled), exponent_measure(p, z) / a));
      for (std::size_t k = 0; k < d; ++k) {
        std::vector<double> marg(d, kInf);
        marg[k] = z[k];
        worst_m = std::max(worst_m, rel_err(exponent_measure(p, marg), 1.0 / z[k]));
      }
    }
    const char* name = model == 0 ? "logistic" : "brown_resnick";
    out.check(worst_h < 1e-8, fmt::format("{} homogeneity max rel err {:.2e}", name, worst_h));
    out.check(worst_m < 1e-12, fmt::format("{} marginal max rel err {:.2e}", name, worst_m));
  }
  return out;
}

// 4. Block factors against finite differences; Brown-Resnick V against Monte Carlo.
// Logistic errors are per component. Brown-Resnick errors are relative to the
// largest component of each gradient, since tiny components of a
// lattice-integrated V cannot be resolved by differencing.
Outcome criterion4() {
  Outcome out;
  RandomStream rng(404, 0);
  for (int model = 0; model < 2; ++model) {
    double worst = 0.0;
    double worst_component = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const std::size_t d = 2 + rng.below(4);
      ModelParams p;
      if (model == 0) {
        p = LogisticParams{0.1 + 0.85 * rng.uniform()};
      } else {
        p = brown_resnick(0.5 + 1.5 * rng.uniform(), 0.5 + 1.4 * rng.uniform(),
                          unit_square_sites(d, rng));
      }
      const auto z = frechet_vector(rng, d);
      std::vector<double> fd(d), got(d);
      double scale = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double h = 1e-5 * z[i];
        std::vector<double> up(z), down(z);
        up[i] += h;
        down[i] -= h;
        fd[i] = -(exponent_measure(p, up) - exponent_measure(p, down)) / (2 * h);
        got[i] = std::exp(log_neg_vtau(p, z, BlockMask{1} << i));
        scale = std::max(scale, std::abs(fd[i]));
      }
      for (std::size_t i = 0; i < d; ++i) {
        worst_component = std::max(worst_component, rel_err(got[i], fd[i]));
        worst = std::max(worst, std::abs(got[i] - fd[i]) / scale);
      }
    }
    if (model == 0) {
      out.check(worst_component < 1e-4,
                fmt::format("logistic |tau|=1 max rel err {:.2e} (tol 1e-04)", worst_component));
    } else {
      out.check(worst < 1e-2,
                fmt::format("brown_resnick |tau|=1 max err relative to gradient scale {:.2e} "
                            "(tol 1e-02; per component {:.2e})",
                            worst, worst_component));
    }
  }

  double worst_z = 0.0;
  for (std::size_t d : {2u, 3u}) {
    for (int rep = 0; rep < 4; ++rep) {
      const auto p = brown_resnick(0.5 + 1.5 * rng.uniform(), 0.5 + 1.4 * rng.uniform(),
                                   unit_square_sites(d, rng));
      const auto z = frechet_vector(rng, d);
      const auto mc = mc_exponent_measure(p, z, 200000, rng);
      const double zscore = std::abs(exponent_measure(ModelParams{p}, z) - mc.estimate) / mc.std_error;
      worst_z = std::max(worst_z, zscore);
    }
  }
  out.check(worst_z < 3.0, fmt::format("brown_resnick V vs Monte Carlo, D=2,3: max |z| {:.2f}",
                                       worst_z));
  return out;
}

// 5. Importance identity, Jensen bound and monotonicity in M.
Outcome criterion5() {
  Outcome out;
  RandomStream rng(505, 0);
  double worst_identity = 0.0;
  double worst_identity2 = 0.0;
  int jensen_bad = 0;
  int order_bad = 0;
  int cases = 0;
  for (int model = 0; model < 2; ++model) {
    for (std::size_t d = 2; d <= 6; ++d) {
      for (int rep = 0; rep < 3; ++rep) {
        ModelParams p;
        if (model == 0) {
          p = LogisticParams{0.1 + 0.85 * rng.uniform()};
        } else {
          p = brown_resnick(0.5 + 1.5 * rng.uniform(), 0.5 + 1.4 * rng.uniform(),
                            unit_square_sites(d, rng));
        }
        const double delta = 0.9 * rng.uniform();
        const EpaParams epa{0.1 + 2.0 * rng.uniform(), delta, 0.2 + 2.0 * rng.uniform()};
        const auto z = frechet_vector(rng, d);
        const auto e = enumerate(p, epa, z);
        const double log_l = full_loglik_enum(p, z);
        double lik1 = 0.0;
        double elbo = 0.0;
        for (std::size_t i = 0; i < e.log_q.size(); ++i) {
          const double q = std::exp(e.log_q[i]);
          lik1 += q * std::exp(e.log_p[i] - e.log_q[i]);
          elbo += q * (e.log_p[i] - e.log_q[i]);
        }
        worst_identity = std::max(worst_identity, rel_err(lik1, std::exp(log_l)));
        jensen_bad += elbo <= log_l ? 0 : 1;
        ++cases;
        if (d <= 4) {
          double lik2 = 0.0;
          for (std::size_t i = 0; i < e.log_q.size(); ++i) {
            for (std::size_t j = 0; j < e.log_q.size(); ++j) {
              const double w = 0.5 * (std::exp(e.log_p[i] - e.log_q[i]) +
                                       std::exp(e.log_p[j] - e.log_q[j]));
              lik2 += std::exp(e.log_q[i] + e.log_q[j]) * w;
            }
          }
          worst_identity2 = std::max(worst_identity2, rel_err(lik2, std::exp(log_l)));
        }
        if (d == 3) {
          const double bound2 = exact_bound_m2(p, epa, z);
          order_bad += (elbo <= bound2 && bound2 <= log_l) ? 0 : 1;
        }
      }
    }
  }
  out.check(worst_identity < 1e-10,
            fmt::format("E[exp(bound_1)] = L: max rel err {:.2e} over {} cases", worst_identity, cases));
  out.check(worst_identity2 < 1e-10,
            fmt::format("E[exp(bound_2)] = L: max rel err {:.2e}", worst_identity2));
  out.check(jensen_bad == 0, fmt::format("ELBO <= log L violated in {} cases", jensen_bad));
  out.check(order_bad == 0, fmt::format("L1 <= L2 <= log L violated in {} D=3 cases", order_bad));
  return out;
}

// 6. Gradient estimators are unbiased for the exact two-sample bound.
Outcome criterion6() {
  Outcome out;
  const std::vector<double> z{0.8, 2.1, 1.3};
  const EpaParams epa{0.9, 0.3, 1.2};
  const std::vector<ModelParams> models{
      LogisticParams{0.55},
      brown_resnick(1.3, 1.2, {{0.1, 0.2}, {0.8, 0.5}, {0.4, 0.9}})};
  const std::size_t draws = 100000;
  const double h = 1e-5;
  for (const auto& model : models) {
    const auto values = param_values(model);
    std::vector<double> fd_theta(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      auto up = values, down = values;
      up[k] += h;
      down[k] -= h;
      fd_theta[k] = (exact_bound_m2(with_param_values(model, up), epa, z) -
                     exact_bound_m2(with_param_values(model, down), epa, z)) /
                    (2 * h);
    }
    std::array<double, 3> fd_phi{};
    for (std::size_t k = 0; k < 3; ++k) {
      EpaParams up = epa, down = epa;
      double* u = k == 0 ? &up.alpha : k == 1 ? &up.delta : &up.rho;
      double* dn = k == 0 ? &down.alpha : k == 1 ? &down.delta : &down.rho;
      *u += h;
      *dn -= h;
      fd_phi[k] = (exact_bound_m2(model, up, z) - exact_bound_m2(model, down, z)) / (2 * h);
    }

    std::vector<double> sum_t(values.size()), sum2_t(values.size());
    std::array<double, 3> sum_p{}, sum2_p{};
    RandomStream rng_t(606, values.size());
    RandomStream rng_p(607, values.size());
    for (std::size_t i = 0; i < draws; ++i) {
      const auto gt = grad_theta_estimate(model, epa, z, 2, rng_t);
      for (std::size_t k = 0; k < gt.size(); ++k) {
        sum_t[k] += gt[k];
        sum2_t[k] += gt[k] * gt[k];
      }
      const auto gp = grad_phi_estimate(model, epa, z, 2, rng_p);
      for (std::size_t k = 0; k < 3; ++k) {
        sum_p[k] += gp[k];
        sum2_p[k] += gp[k] * gp[k];
      }
    }
    const double n = static_cast<double>(draws);
    auto zscore = [&](double s, double s2, double target) {
      const double m = s / n;
      const double se = std::sqrt((s2 / n - m * m) / n);
      return (m - target) / se;
    };
    const auto names = param_names(kind_of(model));
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double zs = zscore(sum_t[k], sum2_t[k], fd_theta[k]);
      out.check(std::abs(zs) < 3.0, fmt::format("{} d/d{}: mean {:.5f} exact {:.5f} z {:.2f}",
                                                to_string(kind_of(model)), names[k], sum_t[k] / n,
                                                fd_theta[k], zs));
    }
    const char* phi_names[] = {"alpha", "delta", "rho"};
    for (std::size_t k = 0; k < 3; ++k) {
      const double zs = zscore(sum_p[k], sum2_p[k], fd_phi[k]);
      out.check(std::abs(zs) < 3.0, fmt::format("{} d/d{}: mean {:.5f} exact {:.5f} z {:.2f}",
                                                to_string(kind_of(model)), phi_names[k],
                                                sum_p[k] / n, fd_phi[k], zs));
    }
  }
  return out;
}

// Logistic VI settings shared by the scaled simulation studies.
VIConfig logistic_vi(std::size_t M, std::uint64_t seed) {
  VIConfig c;
  c.M = M;
  c.R = 5000;
  c.lr_theta = 2e-4;
  c.lr_phi = 1e-5;
  c.seed = seed;
  c.init_model = LogisticParams{0.6};
  return c;
}

double vi_theta(const SpatialDataset& data, const VIConfig& config) {
  return param_values(fit(data, config).estimate)[0];
}

double mle_theta(const SpatialDataset& data) {
  const auto res = fit_mle(data, LogisticParams{0.6}, MleBounds::defaults(ModelKind::logistic));
  return std::get<LogisticParams>(res.params).theta;
}

// 7. Bias of the logistic estimate shrinks as M grows.
Outcome criterion7() {
  Outcome out;
  const std::size_t reps = 20;
  std::vector<double> m1, m20;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto data = simulate_data(LogisticParams{0.9}, line_sites(10), 20,
                                    RandomStream::derive(707, {r})());
    m1.push_back(vi_theta(data, logistic_vi(1, 7000 + r)));
    m20.push_back(vi_theta(data, logistic_vi(20, 7000 + r)));
  }
  const double b1 = std::abs(mean(m1) - 0.9);
  const double b20 = std::abs(mean(m20) - 0.9);
  out.check(b20 < b1, fmt::format("mean theta M=1 {:.4f} (|bias| {:.4f}), M=20 {:.4f} (|bias| {:.4f})",
                                  mean(m1), b1, mean(m20), b20));
  out.check(b20 <= 0.05, fmt::format("|mean(M=20) - 0.9| = {:.4f} <= 0.05", b20));
  return out;
}

// 8. VI agrees with the MLE on average; spread falls with dimension.
Outcome criterion8() {
  Outcome out;
  const std::size_t reps = 20;
  std::map<std::pair<std::size_t, double>, double> vi_sd;
  for (double theta : {0.3, 0.9}) {
    for (std::size_t d : {2u, 10u}) {
      std::vector<double> vi, mle;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto seed = RandomStream::derive(808, {d, static_cast<std::uint64_t>(theta * 10), r})
                              ();
        const auto data = simulate_data(LogisticParams{theta}, line_sites(d), 20, seed);
        vi.push_back(vi_theta(data, logistic_vi(25, seed ^ 0x5a5aull)));
        mle.push_back(mle_theta(data));
      }
      vi_sd[{d, theta}] = sd(vi);
      const double gap = std::abs(mean(vi) - mean(mle));
      out.check(gap <= 0.05,
                fmt::format("D={} theta={}: mean VI {:.4f} (sd {:.4f}), mean MLE {:.4f} (sd {:.4f}), "
                            "gap {:.4f}",
                            d, theta, mean(vi), sd(vi), mean(mle), sd(mle), gap));
    }
  }
  const double sd2 = vi_sd[{2, 0.9}];
  const double sd10 = vi_sd[{10, 0.9}];
  out.check(sd10 < sd2, fmt::format("theta=0.9: sd(VI) D=10 {:.4f} < D=2 {:.4f}", sd10, sd2));
  return out;
}

// 9. Samplers reproduce exp(-V) and unit Frechet margins.
Outcome criterion9() {
  Outcome out;
  RandomStream site_rng(909, 0);
  const std::size_t d = 4;
  const std::size_t draws = 10000;
  const std::vector<ModelParams> models{
      LogisticParams{0.45}, brown_resnick(1.5, 1.5, unit_square_sites(d, site_rng))};
  const std::vector<std::vector<double>> grid{{1, 1, 1, 1},
                                              {0.5, 2, 1, 3},
                                              {2, 2, 0.8, 1.5},
                                              {4, 0.7, 3, 2},
                                              {1.2, 1.2, 5, 0.6}};
  for (const auto& model : models) {
    RandomStream rng(910, static_cast<std::uint64_t>(kind_of(model)));
    std::vector<std::vector<double>> obs;
    if (const auto* lp = std::get_if<LogisticParams>(&model)) {
      obs = sample_logistic(*lp, d, draws, rng);
    } else {
      obs = sample_brown_resnick(std::get<BrownResnickParams>(model), draws, rng).observations;
    }
    auto check_point = [&](const std::vector<double>& z) {
      std::size_t hit = 0;
      for (const auto& x : obs) {
        bool below = true;
        for (std::size_t i = 0; i < d; ++i) below = below && x[i] <= z[i];
        hit += below ? 1 : 0;
      }
      const double prob = std::exp(-exponent_measure(model, z));
      const double se = std::sqrt(prob * (1 - prob) / static_cast<double>(draws));
      return std::abs(static_cast<double>(hit) / static_cast<double>(draws) - prob) / se;
    };
    double worst_joint = 0.0;
    for (const auto& z : grid) worst_joint = std::max(worst_joint, check_point(z));
    double worst_margin = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      for (double q : {0.5, 1.0, 2.0, 5.0}) {
        std::vector<double> z(d, kInf);
        z[k] = q;
        worst_margin = std::max(worst_margin, check_point(z));
      }
    }
    const auto name = to_string(kind_of(model));
    out.check(worst_joint < 4.0, fmt::format("{} joint cdf at 5 points: max |z| {:.2f}", name,
                                             worst_joint));
    out.check(worst_margin < 4.0,
              fmt::format("{} unit Frechet margins: max |z| {:.2f}", name, worst_margin));
  }
  return out;
}

// 10. Brown-Resnick VI lands near the enumerated-likelihood MLE.
Outcome criterion10() {
  Outcome out;
  RandomStream site_rng(1010, 0);
  const auto truth = brown_resnick(1.5, 1.5, unit_square_sites(5, site_rng));
  const auto data = simulate_data(truth, truth.setup->sites, 10, 1011);
  BrownResnickParams start = truth;
  start.range = 1.0;
  start.smoothness = 1.0;
  const auto mle = fit_mle(data, start, MleBounds::defaults(ModelKind::brown_resnick));
  const auto mle_v = param_values(mle.params);

  VIConfig c;
  c.M = 50;
  c.R = 2000;
  c.lr_theta = 1e-3;
  c.lr_phi = 1e-5;
  c.seed = 1012;
  c.init_model = start;
  const auto trace = fit(data, c);
  const auto vi_v = param_values(trace.estimate);
  out.check(std::abs(vi_v[0] - mle_v[0]) <= 0.3,
            fmt::format("range VI {:.4f} MLE {:.4f}", vi_v[0], mle_v[0]));
  out.check(std::abs(vi_v[1] - mle_v[1]) <= 0.3,
            fmt::format("smoothness VI {:.4f} MLE {:.4f}", vi_v[1], mle_v[1]));
  return out;
}

// 11. Mini-batch and full-batch fits agree.
Outcome criterion11() {
  Outcome out;
  const auto data = simulate_data(LogisticParams{0.7}, line_sites(5), 150, 1111);
  auto full = logistic_vi(25, 1112);
  full.R = 3000;
  full.tail_fraction = 0.5;
  auto mini = full;
  mini.batch = 10;
  const double t_full = vi_theta(data, full);
  const double t_mini = vi_theta(data, mini);
  out.check(std::abs(t_full - t_mini) <= 0.03,
            fmt::format("theta full batch {:.4f}, batch 10 {:.4f}, MLE {:.4f}", t_full, t_mini,
                        mle_theta(data)));
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every file in `dir` keyed by name.
std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    files[entry.path().filename().string()] = slurp(entry.path());
  }
  return files;
}

// 12. CLI outputs are byte-identical across runs and thread counts.
Outcome criterion12() {
  Outcome out;
  const auto root = std::filesystem::temp_directory_path() / "msvi_acceptance_12";
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root);

  const std::vector<std::pair<std::string, std::string>> configs{
      {"simulate_logistic", "command = simulate\nmodel = logistic\nD = 6\nn = 40\ntheta = 0.5\n"},
      {"simulate_br",
       "command = simulate\nmodel = brown_resnick\nD = 5\nn = 40\nrange = 1.5\nsmoothness = 1.5\n"
       "record_partitions = true\n"},
      {"fit_logistic",
       "command = fit\nmodel = logistic\nD = 5\nn = 12\ntheta = 0.8\nM = 5\nR = 100\n"
       "lr_theta = 2e-4\nlr_phi = 1e-5\nbatch = 5\n"},
      {"fit_br",
       "command = fit\nmodel = brown_resnick\nD = 4\nn = 6\nrange = 1.5\nsmoothness = 1.5\nM = 5\n"
       "R = 20\nlr_theta = 1e-3\nlr_phi = 1e-5\n"},
      {"mle_logistic", "command = mle\nmodel = logistic\nD = 8\nn = 30\ntheta = 0.6\n"},
      {"mle_br",
       "command = mle\nmodel = brown_resnick\nD = 3\nn = 10\nrange = 1.5\nsmoothness = 1.5\n"},
      {"sweep",
       "command = sweep\nmodel = logistic\nD_values = 3, 5\nn = 10\ntheta_values = 0.5, 0.9\n"
       "M_values = 2, 5\nR = 50\nreplications = 3\nlr_theta = 2e-4\nlr_phi = 1e-5\n"}};

  for (const auto& [name, text] : configs) {
    const auto base = cli::parse_config(text + "seed = 12\n", name);
    std::vector<std::map<std::string, std::string>> runs;
    for (std::size_t threads : {1u, 1u, 2u}) {
      auto c = base;
      c.threads = threads;
      c.out = root / fmt::format("{}_{}", name, runs.size());
      std::ostringstream log;
      const int rc = cli::run_experiment(c, log);
      if (rc != cli::kExitOk) {
        out.check(false, fmt::format("{} exited with {}: {}", name, rc, log.str()));
        break;
      }
      runs.push_back(snapshot(c.out));
    }
    if (runs.size() != 3) continue;
    const bool same = runs[0] == runs[1] && runs[0] == runs[2] && !runs[0].empty();
    out.check(same, fmt::format("{}: {} files identical across runs and threads 1/2", name,
                                runs[0].size()));
  }
  std::filesystem::remove_all(root);
  return out;
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<const char*, std::function<Outcome()>>> table{
      {1, {"logistic recursion equals enumeration", criterion1}},
      {2, {"partition distribution normalization and sampler", criterion2}},
      {3, {"exponent measure homogeneity and margins", criterion3}},
      {4, {"block factors and Monte Carlo oracle", criterion4}},
      {5, {"importance identity and bound ordering", criterion5}},
      {6, {"gradient estimators unbiased", criterion6}},
      {7, {"bias falls with M", criterion7}},
      {8, {"VI vs MLE across D and theta", criterion8}},
      {9, {"sampler correctness", criterion9}},
      {10, {"Brown-Resnick VI vs MLE", criterion10}},
      {11, {"mini-batch vs full batch", criterion11}},
      {12, {"CLI determinism", criterion12}},
  };
  return table;
}

bool run(int id) {
  const auto& [title, fn] = criteria().at(id);
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = fn();
  } catch (const std::exception& e) {
    outcome.check(false, fmt::format("exception: {}", e.what()));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& note : outcome.notes) fmt::print("  {}\n", note);
  fmt::print("{} criterion {}: {} ({:.1f} s)\n", outcome.pass ? "PASS" : "FAIL", id, title, secs);
  std::fflush(stdout);
  return outcome.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    fmt::print(stderr, "usage: {} <1-12|all>\n", argv[0]);
    return 2;
  }
  const std::string arg = argv[1];
  bool ok = true;
  if (arg == "all") {
    for (const auto& [id, _] : criteria()) ok = run(id) && ok;
  } else {
    const int id = std::atoi(arg.c_str());
    if (!criteria().count(id)) {
      fmt::print(stderr, "unknown criterion '{}'\n", arg);
      return 2;
    }
    ok = run(id);
  }
  return ok ? 0 : 1;
}
