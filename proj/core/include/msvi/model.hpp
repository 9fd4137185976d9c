#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "msvi/dataset.hpp"
#include "msvi/mvn.hpp"
#include "msvi/partition.hpp"
#include "msvi/random.hpp"

namespace msvi {

enum class ModelKind { logistic, brown_resnick };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// Multivariate logistic: V(z) = (sum_i z_i^{-1/theta})^theta, 0 < theta <= 1.
struct LogisticParams {
  double theta = 0.5;
  void validate() const;
};

/// Site geometry and Gaussian-probability budget shared by every
/// Brown-Resnick evaluation on one dataset. Immutable once built.
struct BrownResnickSetup {
  std::vector<Site> sites;
  DistanceMatrix lag;  // Euclidean distances between sites
  MvnOptions mvn;
  std::uint64_t qmc_seed = 0;

  /// Fixed-budget default for likelihood evaluation: 12 shifts x 256 points.
  static MvnOptions default_likelihood_mvn();
  static constexpr std::uint64_t kDefaultQmcSeed = 0x6d73766951ull;

  static std::shared_ptr<const BrownResnickSetup> make(
      std::vector<Site> sites, MvnOptions mvn = default_likelihood_mvn(),
      std::uint64_t qmc_seed = kDefaultQmcSeed);
};

/// Brown-Resnick process with semivariogram gamma(h) = (|h| / range)^smoothness,
/// range > 0 and 0 < smoothness <= 2.
struct BrownResnickParams {
  double range = 1.0;
  double smoothness = 1.0;
  std::shared_ptr<const BrownResnickSetup> setup;

  void validate() const;
  double semivariogram(double lag) const;
};

using ModelParams = std::variant<LogisticParams, BrownResnickParams>;

inline constexpr std::size_t kMaxModelParams = 2;

ModelKind kind_of(const ModelParams& params);
std::size_t num_params(ModelKind kind);
/// Column names: {"theta"} or {"range", "smoothness"}.
std::vector<std::string> param_names(ModelKind kind);
std::vector<double> param_values(const ModelParams& params);
/// Copy of `params` with its numeric parameters replaced (BR setup kept).
ModelParams with_param_values(const ModelParams& params, std::span<const double> values);
void validate(const ModelParams& params, std::size_t dim);

/// Exponent measure V(z). Entries may be +inf (marginalized) as long as one
/// entry is finite.
double exponent_measure(const ModelParams& params, std::span<const double> z);

/// log of -dV/dz_tau, the Stephenson-Tawn factor of block tau (items are
/// 0-based). Returns -inf when the factor vanishes.
double log_neg_vtau(const ModelParams& params, std::span<const double> z, BlockMask tau);
double log_neg_vtau(const ModelParams& params, std::span<const double> z,
                    std::span<const int> tau);

/// log p(z, partition) = -V(z) + sum over blocks of log_neg_vtau.
double st_loglik(const ModelParams& params, std::span<const double> z,
                 const SetPartition& partition);

inline constexpr int kMaxFullLikelihoodDim = 10;

/// log of the full likelihood, summing st_loglik over every partition.
/// D <= 10.
double full_loglik_enum(const ModelParams& params, std::span<const double> z);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Plain Monte-Carlo estimate of E[max_k W(s_k) / z_k] with
/// W(s) = exp(eps(s) - gamma(s)), eps a centred Gaussian process with
/// eps(0) = 0 and Var(eps(s) - eps(t)) = 2 gamma(s - t). N >= 1000.
McEstimate mc_exponent_measure(const BrownResnickParams& params, std::span<const double> z,
                               std::size_t samples, RandomStream& rng);

struct ValueGrad {
  double value = 0.0;
  std::array<double, kMaxModelParams> grad{};
};

/// Stephenson-Tawn likelihood for one observation with per-block caching.
///
/// Construct once per (parameters, observation) and evaluate many
/// partitions; exponent measure and block factors are computed on first use.
/// Gradients are with respect to param_values(params).
class StLikelihood {
 public:
  StLikelihood(const ModelParams& params, std::span<const double> z);
  ~StLikelihood();
  StLikelihood(StLikelihood&&) noexcept;
  StLikelihood& operator=(StLikelihood&&) noexcept;

  double exponent_measure();
  double log_neg_vtau(BlockMask tau);
  double operator()(const SetPartition& partition);

  ValueGrad exponent_measure_grad();
  ValueGrad log_neg_vtau_grad(BlockMask tau);
  ValueGrad loglik_grad(const SetPartition& partition);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace msvi
