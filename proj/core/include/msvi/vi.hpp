#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msvi/dataset.hpp"
#include "msvi/epa.hpp"
#include "msvi/error.hpp"
#include "msvi/model.hpp"
#include "msvi/random.hpp"

namespace msvi {

/// Importance-weighted bound and its gradient estimates for one observation,
/// all computed from the same M draws of the partition distribution.
struct IwaeEstimate {
  double value = 0.0;
  std::vector<double> grad_model;  // constrained model parameters
  std::array<double, 3> grad_epa{};  // (alpha, delta, rho)
  bool finite = true;
};

/// What estimate_observation computes beyond the bound itself.
enum class IwaeParts { value, model_grad, epa_grad, all };

IwaeEstimate estimate_observation(const ModelParams& model, const EpaParams& epa,
                                  std::span<const double> z, const DistanceMatrix& dist,
                                  std::size_t M, RandomStream& rng,
                                  IwaeParts parts = IwaeParts::all);

/// log of the average of M importance weights, partitions drawn from the EPA
/// distribution built on the observation-value distance matrix. Returns -inf
/// if every weight vanishes.
double iwae_estimate(const ModelParams& model, const EpaParams& epa, std::span<const double> z,
                     std::size_t M, RandomStream& rng);

/// Self-normalized weighted model score; unbiased for the bound's gradient in
/// the constrained model parameters. Logistic theta = 1 is rejected.
std::vector<double> grad_theta_estimate(const ModelParams& model, const EpaParams& epa,
                                        std::span<const double> z, std::size_t M,
                                        RandomStream& rng);

/// Score-function estimate of the bound's gradient in (alpha, delta, rho).
std::array<double, 3> grad_phi_estimate(const ModelParams& model, const EpaParams& epa,
                                        std::span<const double> z, std::size_t M,
                                        RandomStream& rng);

struct VIConfig {
  std::size_t M = 25;
  std::size_t R = 5000;
  double lr_theta = 0.0;
  double lr_phi = 0.0;
  double momentum = 0.9;
  /// 0 means the full sample in every iteration.
  std::size_t batch = 0;
  std::uint64_t seed = 0;
  ModelParams init_model = LogisticParams{0.6};
  EpaParams init_epa{0.5, 0.5, 1.0};
  DistanceKind distance = DistanceKind::observation;
  std::size_t threads = 1;
  /// Store elapsed milliseconds in the trace (otherwise 0, so traces are
  /// reproducible byte for byte).
  bool record_wall_time = false;
  /// Fraction of final iterations whose parameters are averaged into the
  /// reported estimate; 0 reports the last iterate.
  double tail_fraction = 0.0;

  void validate(std::size_t n) const;
};

struct TraceRow {
  std::size_t iter = 0;
  std::vector<double> model;
  EpaParams epa;
  double iwae = 0.0;
  double grad_norm_theta = 0.0;
  double grad_norm_phi = 0.0;
  bool skipped = false;
  double wall_ms = 0.0;
};

struct FitTrace {
  ModelKind kind = ModelKind::logistic;
  std::vector<TraceRow> rows;
  std::size_t skipped = 0;
  ModelParams final_model = LogisticParams{};
  EpaParams final_epa;
  /// Reported estimate: final_model, or the tail average when configured.
  ModelParams estimate = LogisticParams{};
};

class FitAborted : public Error {
 public:
  FitAborted(const std::string& what, FitTrace partial)
      : Error(what), trace_(std::move(partial)) {}
  const FitTrace& trace() const noexcept { return trace_; }

 private:
  FitTrace trace_;
};

/// Stochastic-gradient maximization of the summed bound. The model kind is
/// taken from config.init_model.
FitTrace fit(const SpatialDataset& data, const VIConfig& config);

}  // namespace msvi
