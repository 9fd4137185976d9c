#include "msvi/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <unordered_map>

#include <fmt/format.h>

#include "msvi/dual.hpp"
#include "msvi/error.hpp"
#include "msvi/linalg.hpp"
#include "msvi/mvn_impl.hpp"
#include "msvi/normal.hpp"

namespace msvi {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::logistic ? "logistic" : "brown_resnick";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "logistic") return ModelKind::logistic;
  if (text == "brown_resnick" || text == "brown-resnick") return ModelKind::brown_resnick;
  throw DomainError(fmt::format("unknown model '{}' (expected logistic or brown_resnick)", text));
}

void LogisticParams::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw DomainError(fmt::format("logistic theta = {} outside (0, 1]", theta));
  }
}

MvnOptions BrownResnickSetup::default_likelihood_mvn() {
  return MvnOptions{.abs_accuracy = 0.0, .max_points = 256, .shifts = 12};
}

std::shared_ptr<const BrownResnickSetup> BrownResnickSetup::make(std::vector<Site> sites,
                                                                 MvnOptions mvn,
                                                                 std::uint64_t qmc_seed) {
  auto setup = std::make_shared<BrownResnickSetup>();
  setup->lag = site_distance_matrix(sites);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (setup->lag(i, j) == 0.0) {
        throw InvalidDataError(
            fmt::format("Brown-Resnick: sites {} and {} coincide", j + 1, i + 1));
      }
    }
  }
  setup->sites = std::move(sites);
  setup->mvn = mvn;
  setup->qmc_seed = qmc_seed;
  return setup;
}

void BrownResnickParams::validate() const {
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw DomainError(fmt::format("Brown-Resnick range = {} must be positive", range));
  }
  if (!(smoothness > 0.0 && smoothness <= 2.0)) {
    throw DomainError(fmt::format("Brown-Resnick smoothness = {} outside (0, 2]", smoothness));
  }
  if (!setup) throw DomainError("Brown-Resnick parameters carry no site setup");
}

double BrownResnickParams::semivariogram(double lag) const {
  return std::pow(lag / range, smoothness);
}

ModelKind kind_of(const ModelParams& params) {
  return std::holds_alternative<LogisticParams>(params) ? ModelKind::logistic
                                                        : ModelKind::brown_resnick;
}

std::size_t num_params(ModelKind kind) { return kind == ModelKind::logistic ? 1 : 2; }

std::vector<std::string> param_names(ModelKind kind) {
  if (kind == ModelKind::logistic) return {"theta"};
  return {"range", "smoothness"};
}

std::vector<double> param_values(const ModelParams& params) {
  if (const auto* p = std::get_if<LogisticParams>(&params)) return {p->theta};
  const auto& br = std::get<BrownResnickParams>(params);
  return {br.range, br.smoothness};
}

ModelParams with_param_values(const ModelParams& params, std::span<const double> values) {
  if (values.size() != num_params(kind_of(params))) {
    throw DomainError("with_param_values: wrong number of parameters");
  }
  if (std::holds_alternative<LogisticParams>(params)) return LogisticParams{values[0]};
  auto br = std::get<BrownResnickParams>(params);
  br.range = values[0];
  br.smoothness = values[1];
  return br;
}

void validate(const ModelParams& params, std::size_t dim) {
  std::visit([](const auto& p) { p.validate(); }, params);
  if (const auto* br = std::get_if<BrownResnickParams>(&params)) {
    if (br->setup->sites.size() != dim) {
      throw DomainError(fmt::format("Brown-Resnick setup has {} sites but z has {} entries",
                                    br->setup->sites.size(), dim));
    }
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Dual2 = Dual<kMaxModelParams>;

template <class T>
class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual T exponent_measure() = 0;
  virtual T log_neg_vtau(BlockMask tau) = 0;
};

template <class T>
class LogisticKernel final : public Kernel<T> {
 public:
  LogisticKernel(T theta, std::span<const double> z) : theta_(theta), logz_(z.size()) {
    using std::exp;
    using std::log;
    double max_term = -kInf;
    std::vector<T> terms(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      logz_[i] = std::log(z[i]);
      terms[i] = -logz_[i] / theta_;
      max_term = std::max(max_term, value(terms[i]));
    }
    T sum(0.0);
    for (const T& t : terms) {
      if (value(t) != -kInf) sum += exp(t - max_term);
    }
    log_s_ = log(sum) + max_term;
  }

  T exponent_measure() override {
    using std::exp;
    return exp(theta_ * log_s_);
  }

  T log_neg_vtau(BlockMask tau) override {
    using std::log;
    const int k = std::popcount(tau);
    double sum_logz = 0.0;
    for (BlockMask m = tau; m; m &= m - 1) sum_logz += logz_[std::countr_zero(m)];
    T r = (theta_ - static_cast<double>(k)) * log_s_ - (1.0 / theta_ + 1.0) * sum_logz;
    if (k > 1) r += static_cast<double>(1 - k) * log(theta_);
    for (int j = 1; j < k; ++j) r += log(static_cast<double>(j) - theta_);
    return r;
  }

 private:
  T theta_;
  std::vector<double> logz_;
  T log_s_;
};

template <class T>
class BrownResnickKernel final : public Kernel<T> {
 public:
  BrownResnickKernel(const BrownResnickSetup& setup, T range, T smoothness,
                     std::span<const double> z)
      : setup_(setup), dim_(z.size()), logz_(z.size()), gamma2_(z.size(), z.size()),
        anchor_(z.size()) {
    using std::exp;
    using std::log;
    for (std::size_t i = 0; i < dim_; ++i) logz_[i] = std::log(z[i]);
    const T log_range = log(range);
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const T g = 2.0 * exp(smoothness * (std::log(setup.lag(i, j)) - log_range));
        gamma2_(i, j) = g;
        gamma2_(j, i) = g;
      }
    }
  }

  T exponent_measure() override {
    using std::exp;
    T v(0.0);
    for (std::size_t j = 0; j < dim_; ++j) {
      if (logz_[j] == kInf) continue;
      v += exp(log_anchor_probability(j) - logz_[j]);
    }
    return v;
  }

  T log_neg_vtau(BlockMask tau) override {
    using std::log;
    const std::size_t j = static_cast<std::size_t>(std::countr_zero(tau));
    const BlockMask rest = tau & (tau - 1);
    if (rest == 0) return log_anchor_probability(j) - 2.0 * logz_[j];

    std::vector<std::size_t> t;
    std::vector<std::size_t> c;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (i == j) continue;
      ((rest >> i) & 1u ? t : c).push_back(i);
    }

    const std::size_t kt = t.size();
    Matrix<T> s_tt(kt, kt);
    std::vector<T> x_t(kt);
    for (std::size_t a = 0; a < kt; ++a) {
      x_t[a] = shifted_log_ratio(j, t[a]);
      for (std::size_t b = 0; b <= a; ++b) {
        s_tt(a, b) = anchored_cov(j, t[a], t[b]);
        s_tt(b, a) = s_tt(a, b);
      }
    }
    const auto chol = cholesky(s_tt, 0.0);
    if (!chol) throw NumericDomainError("Brown-Resnick: block covariance is not positive definite");
    const Matrix<T>& l = *chol;
    for (std::size_t a = 0; a < kt; ++a) {
      if (value(l(a, a)) <= 0.0) {
        throw NumericDomainError("Brown-Resnick: singular block covariance");
      }
    }
    const std::vector<T> whitened = forward_solve(l, x_t);
    T quad(0.0);
    T logdet(0.0);
    for (std::size_t a = 0; a < kt; ++a) {
      quad += whitened[a] * whitened[a];
      logdet += 2.0 * log(l(a, a));
    }
    T result = -0.5 * static_cast<double>(kt) * std::log(2.0 * std::numbers::pi) -
               0.5 * logdet - 0.5 * quad - 2.0 * logz_[j];
    for (std::size_t i : t) result -= logz_[i];

    if (c.empty()) return result;

    // Conditional law of the remaining coordinates given the block.
    const std::vector<T> precision_x = backward_solve_transposed(l, whitened);
    const std::size_t kc = c.size();
    std::vector<std::vector<T>> proj(kc);
    std::vector<T> upper(kc);
    for (std::size_t r = 0; r < kc; ++r) {
      std::vector<T> cross(kt);
      T mean(0.0);
      for (std::size_t a = 0; a < kt; ++a) {
        cross[a] = anchored_cov(j, c[r], t[a]);
        mean += cross[a] * precision_x[a];
      }
      proj[r] = forward_solve(l, cross);
      upper[r] = shifted_log_ratio(j, c[r]) - mean;
    }
    Matrix<T> cond(kc, kc);
    for (std::size_t r = 0; r < kc; ++r) {
      for (std::size_t q = 0; q <= r; ++q) {
        T v = anchored_cov(j, c[r], c[q]);
        for (std::size_t a = 0; a < kt; ++a) v -= proj[r][a] * proj[q][a];
        cond(r, q) = v;
        cond(q, r) = v;
      }
    }
    result += log_gaussian_cdf(upper, cond);
    return result;
  }

 private:
  /// Cov(X_a, X_b) for X_i = eps(s_i) - eps(s_j), i.e. (G_ja + G_jb - G_ab) / 2.
  T anchored_cov(std::size_t j, std::size_t a, std::size_t b) const {
    if (a == b) return gamma2_(j, a);
    return 0.5 * (gamma2_(j, a) + gamma2_(j, b) - gamma2_(a, b));
  }

  /// log(z_i / z_j) + G_ij / 2.
  T shifted_log_ratio(std::size_t j, std::size_t i) const {
    return (logz_[i] - logz_[j]) + 0.5 * gamma2_(j, i);
  }

  /// log P(X <= upper) for X ~ N(0, cov), standardized internally.
  T log_gaussian_cdf(const std::vector<T>& upper, const Matrix<T>& cov) {
    using std::log;
    using std::sqrt;
    const std::size_t k = upper.size();
    std::vector<T> sd(k);
    std::vector<T> std_upper(k);
    for (std::size_t r = 0; r < k; ++r) {
      if (!(value(cov(r, r)) > 0.0)) {
        throw NumericDomainError(fmt::format(
            "Brown-Resnick: conditional variance {} is not positive", value(cov(r, r))));
      }
      sd[r] = sqrt(cov(r, r));
      std_upper[r] = value(upper[r]) == kInf ? T(kInf) : upper[r] / sd[r];
    }
    if (k == 1) return log_norm_cdf(std_upper[0]);
    Matrix<T> corr(k, k);
    for (std::size_t r = 0; r < k; ++r) {
      corr(r, r) = T(1.0);
      for (std::size_t q = 0; q < r; ++q) {
        corr(r, q) = cov(r, q) / (sd[r] * sd[q]);
        corr(q, r) = corr(r, q);
      }
    }
    RandomStream rng(setup_.qmc_seed, 0);
    const auto res = detail::mvn_cdf_t<T>(std_upper, corr, setup_.mvn, rng);
    const double p = value(res.probability);
    if (std::isnan(p) || p < 0.0) {
      throw NumericDomainError(fmt::format("Brown-Resnick: Gaussian probability {} invalid", p));
    }
    if (p == 0.0) return T(-kInf);
    return log(res.probability);
  }

  T log_anchor_probability(std::size_t j) {
    if (anchor_[j]) return *anchor_[j];
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (i != j) others.push_back(i);
    }
    const std::size_t k = others.size();
    T lp(0.0);
    if (k > 0) {
      std::vector<T> upper(k);
      Matrix<T> cov(k, k);
      for (std::size_t a = 0; a < k; ++a) {
        upper[a] = logz_[others[a]] == kInf ? T(kInf) : shifted_log_ratio(j, others[a]);
        for (std::size_t b = 0; b <= a; ++b) {
          cov(a, b) = anchored_cov(j, others[a], others[b]);
          cov(b, a) = cov(a, b);
        }
      }
      lp = log_gaussian_cdf(upper, cov);
    }
    anchor_[j] = lp;
    return lp;
  }

  const BrownResnickSetup& setup_;
  std::size_t dim_;
  std::vector<double> logz_;
  Matrix<T> gamma2_;
  std::vector<std::optional<T>> anchor_;
};

template <class T>
std::unique_ptr<Kernel<T>> make_kernel(const ModelParams& params, std::span<const double> z) {
  if (const auto* p = std::get_if<LogisticParams>(&params)) {
    T theta(p->theta);
    if constexpr (!std::is_same_v<T, double>) theta = T::variable(p->theta, 0);
    return std::make_unique<LogisticKernel<T>>(theta, z);
  }
  const auto& br = std::get<BrownResnickParams>(params);
  T range(br.range);
  T smooth(br.smoothness);
  if constexpr (!std::is_same_v<T, double>) {
    range = T::variable(br.range, 0);
    smooth = T::variable(br.smoothness, 1);
  }
  return std::make_unique<BrownResnickKernel<T>>(*br.setup, range, smooth, z);
}

void check_observation(std::span<const double> z, bool allow_infinite) {
  if (z.empty()) throw DomainError("observation is empty");
  bool any_finite = false;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const bool inf = z[i] == kInf;
    if (std::isnan(z[i]) || z[i] <= 0.0 || (inf && !allow_infinite)) {
      throw DomainError(fmt::format("observation entry {} = {} is not positive and finite",
                                    i + 1, z[i]));
    }
    any_finite = any_finite || !inf;
  }
  if (!any_finite) throw DomainError("exponent measure: every entry is +inf");
}

void check_block(BlockMask tau, std::size_t dim) {
  if (tau == 0) throw DomainError("block is empty");
  if (dim < 64 && (tau >> dim) != 0) throw DomainError("block has an item outside {1..D}");
}

double checked_log(double v) {
  if (std::isnan(v)) throw NumericDomainError("log_neg_vtau evaluated to NaN");
  return v;
}

ValueGrad to_value_grad(const Dual2& d) { return {d.v, d.d}; }

}  // namespace

struct StLikelihood::Impl {
  ModelParams params;
  std::vector<double> z;
  std::unique_ptr<Kernel<double>> values;
  std::unique_ptr<Kernel<Dual2>> duals;
  std::optional<double> v;
  std::optional<Dual2> v_grad;
  std::unordered_map<BlockMask, double> blocks;
  std::unordered_map<BlockMask, Dual2> block_grads;

  Kernel<double>& value_kernel() {
    if (!values) values = make_kernel<double>(params, z);
    return *values;
  }
  Kernel<Dual2>& dual_kernel() {
    if (!duals) duals = make_kernel<Dual2>(params, z);
    return *duals;
  }
};

StLikelihood::StLikelihood(const ModelParams& params, std::span<const double> z)
    : impl_(std::make_unique<Impl>()) {
  validate(params, z.size());
  check_observation(z, false);
  if (z.size() > 64) throw DomainError("StLikelihood supports at most 64 sites");
  impl_->params = params;
  impl_->z.assign(z.begin(), z.end());
}

StLikelihood::~StLikelihood() = default;
StLikelihood::StLikelihood(StLikelihood&&) noexcept = default;
StLikelihood& StLikelihood::operator=(StLikelihood&&) noexcept = default;

double StLikelihood::exponent_measure() {
  if (!impl_->v) impl_->v = impl_->value_kernel().exponent_measure();
  return *impl_->v;
}

double StLikelihood::log_neg_vtau(BlockMask tau) {
  check_block(tau, impl_->z.size());
  auto it = impl_->blocks.find(tau);
  if (it != impl_->blocks.end()) return it->second;
  const double r = checked_log(impl_->value_kernel().log_neg_vtau(tau));
  impl_->blocks.emplace(tau, r);
  return r;
}

double StLikelihood::operator()(const SetPartition& partition) {
  if (partition.dim() != impl_->z.size()) {
    throw DomainError("partition size does not match the observation");
  }
  double total = -exponent_measure();
  for (BlockMask m : partition.block_masks()) total += log_neg_vtau(m);
  return total;
}

ValueGrad StLikelihood::exponent_measure_grad() {
  if (!impl_->v_grad) impl_->v_grad = impl_->dual_kernel().exponent_measure();
  return to_value_grad(*impl_->v_grad);
}

ValueGrad StLikelihood::log_neg_vtau_grad(BlockMask tau) {
  check_block(tau, impl_->z.size());
  auto it = impl_->block_grads.find(tau);
  if (it == impl_->block_grads.end()) {
    const Dual2 r = impl_->dual_kernel().log_neg_vtau(tau);
    checked_log(r.v);
    it = impl_->block_grads.emplace(tau, r).first;
  }
  return to_value_grad(it->second);
}

ValueGrad StLikelihood::loglik_grad(const SetPartition& partition) {
  if (partition.dim() != impl_->z.size()) {
    throw DomainError("partition size does not match the observation");
  }
  exponent_measure_grad();
  Dual2 total = -*impl_->v_grad;
  for (BlockMask m : partition.block_masks()) {
    log_neg_vtau_grad(m);
    total += impl_->block_grads.at(m);
  }
  return to_value_grad(total);
}

double exponent_measure(const ModelParams& params, std::span<const double> z) {
  validate(params, z.size());
  check_observation(z, true);
  return make_kernel<double>(params, z)->exponent_measure();
}

double log_neg_vtau(const ModelParams& params, std::span<const double> z, BlockMask tau) {
  StLikelihood lik(params, z);
  return lik.log_neg_vtau(tau);
}

double log_neg_vtau(const ModelParams& params, std::span<const double> z,
                    std::span<const int> tau) {
  BlockMask mask = 0;
  for (int i : tau) {
    if (i < 0 || static_cast<std::size_t>(i) >= z.size()) {
      throw DomainError(fmt::format("block item {} outside 1..{}", i + 1, z.size()));
    }
    mask |= BlockMask{1} << i;
  }
  return log_neg_vtau(params, z, mask);
}

double st_loglik(const ModelParams& params, std::span<const double> z,
                 const SetPartition& partition) {
  StLikelihood lik(params, z);
  return lik(partition);
}

double full_loglik_enum(const ModelParams& params, std::span<const double> z) {
  const int dim = static_cast<int>(z.size());
  if (dim > kMaxFullLikelihoodDim) {
    throw DomainError(fmt::format(
        "full_loglik_enum: D = {} would sum {} partitions (limit D = {})", dim,
        bell_number(dim).str(), kMaxFullLikelihoodDim));
  }
  StLikelihood lik(params, z);
  std::vector<double> terms;
  for_each_partition(dim, [&](const SetPartition& p) { terms.push_back(lik(p)); });
  const double m = *std::max_element(terms.begin(), terms.end());
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

McEstimate mc_exponent_measure(const BrownResnickParams& params, std::span<const double> z,
                               std::size_t samples, RandomStream& rng) {
  params.validate();
  const std::size_t dim = z.size();
  if (params.setup->sites.size() != dim) {
    throw DomainError("mc_exponent_measure: site count does not match z");
  }
  check_observation(z, true);
  if (samples < 1000) throw DomainError("mc_exponent_measure: need at least 1000 samples");

  const auto& sites = params.setup->sites;
  std::vector<double> gamma0(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    gamma0[i] = params.semivariogram(std::hypot(sites[i].x, sites[i].y));
  }
  Matrix<double> cov(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double g = i == j ? 0.0 : params.semivariogram(params.setup->lag(i, j));
      cov(i, j) = gamma0[i] + gamma0[j] - g;
      cov(j, i) = cov(i, j);
    }
  }
  const auto chol = cholesky(cov, 1e-10);
  if (!chol) throw NumericDomainError("mc_exponent_measure: increment covariance is not PSD");

  std::vector<double> normals(dim);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    for (double& x : normals) x = rng.normal();
    double best = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      if (z[i] == kInf) continue;
      double eps = 0.0;
      for (std::size_t k = 0; k <= i; ++k) eps += (*chol)(i, k) * normals[k];
      best = std::max(best, std::exp(eps - gamma0[i]) / z[i]);
    }
    sum += best;
    sum_sq += best * best;
  }
  const double mean = sum / static_cast<double>(samples);
  const double var = (sum_sq - sum * mean) / static_cast<double>(samples - 1);
  return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(samples))};
}

}  // namespace msvi
