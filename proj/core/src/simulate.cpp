#include "msvi/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "msvi/error.hpp"
#include "msvi/linalg.hpp"

namespace msvi {
namespace {

/// Positive stable variable with Laplace transform exp(-s^theta).
double positive_stable(double theta, RandomStream& rng) {
  if (theta == 1.0) return 1.0;
  const double u = std::numbers::pi * rng.uniform();
  const double w = rng.exponential();
  const double a = std::sin(theta * u) / std::pow(std::sin(u), 1.0 / theta);
  const double b = std::pow(std::sin((1.0 - theta) * u) / w, (1.0 - theta) / theta);
  return a * b;
}

std::vector<double> logistic_draw(double theta, std::size_t dim, RandomStream& rng) {
  const double s = positive_stable(theta, rng);
  std::vector<double> z(dim);
  for (double& x : z) x = std::pow(s / rng.exponential(), theta);
  return z;
}

/// Per-anchor factors of the increments eps(s_k) - eps(s_j).
struct ExtremalFactors {
  std::vector<Matrix<double>> chol;
  Matrix<double> gamma;
};

ExtremalFactors extremal_factors(const BrownResnickParams& params) {
  const auto& lag = params.setup->lag;
  const std::size_t dim = lag.dim();
  ExtremalFactors f{{}, Matrix<double>(dim, dim)};
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) f.gamma(i, j) = i == j ? 0.0 : params.semivariogram(lag(i, j));
  }
  for (std::size_t j = 0; j < dim; ++j) {
    Matrix<double> cov(dim, dim);
    double scale = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      for (std::size_t l = 0; l < dim; ++l) {
        cov(k, l) = f.gamma(j, k) + f.gamma(j, l) - f.gamma(k, l);
      }
      scale = std::max(scale, cov(k, k));
    }
    auto l = cholesky(cov, 1e-12 * std::max(scale, 1.0));
    if (!l) {
      throw NumericDomainError(
          fmt::format("Brown-Resnick simulation: increment covariance at site {} is not PSD", j + 1));
    }
    f.chol.push_back(std::move(*l));
  }
  return f;
}

void extremal_draw(const ExtremalFactors& f, RandomStream& rng, std::vector<double>& z,
                   std::vector<std::uint64_t>& ids) {
  const std::size_t dim = z.size();
  std::fill(z.begin(), z.end(), 0.0);
  std::vector<double> normals(dim);
  std::vector<double> y(dim);
  std::uint64_t next_id = 0;
  for (std::size_t j = 0; j < dim; ++j) {
    double arrival = rng.exponential();
    double zeta = 1.0 / arrival;
    while (zeta > z[j]) {
      for (double& x : normals) x = rng.normal();
      const Matrix<double>& l = f.chol[j];
      bool accept = true;
      for (std::size_t k = 0; k < dim; ++k) {
        double eps = 0.0;
        for (std::size_t m = 0; m <= k; ++m) eps += l(k, m) * normals[m];
        y[k] = zeta * std::exp(eps - f.gamma(j, k));
        if (k < j && y[k] >= z[k]) {
          accept = false;
          break;
        }
      }
      if (accept) {
        for (std::size_t k = j; k < dim; ++k) {
          if (y[k] > z[k]) {
            z[k] = y[k];
            ids[k] = next_id;
          }
        }
        ++next_id;
      }
      arrival += rng.exponential();
      zeta = 1.0 / arrival;
    }
  }
}

}  // namespace

std::vector<std::vector<double>> sample_logistic(const LogisticParams& params, std::size_t dim,
                                                 std::size_t n, RandomStream& rng) {
  params.validate();
  if (dim < 1 || n < 1) throw DomainError("sample_logistic: need D >= 1 and n >= 1");
  std::vector<std::vector<double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(logistic_draw(params.theta, dim, rng));
  return out;
}

BrownResnickSample sample_brown_resnick(const BrownResnickParams& params, std::size_t n,
                                        RandomStream& rng, bool record_partitions) {
  params.validate();
  if (n < 1) throw DomainError("sample_brown_resnick: need n >= 1");
  const ExtremalFactors f = extremal_factors(params);
  const std::size_t dim = params.setup->sites.size();
  BrownResnickSample out;
  std::vector<std::uint64_t> ids(dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> z(dim);
    extremal_draw(f, rng, z, ids);
    out.observations.push_back(std::move(z));
    if (record_partitions) out.partitions.push_back(empirical_partition(ids));
  }
  return out;
}

SetPartition empirical_partition(std::span<const std::uint64_t> event_ids) {
  return SetPartition::from_labels(event_ids);
}

SimulationResult simulate(const SimulationRequest& request) {
  if (request.n < 1) throw DomainError("simulate: need n >= 1");
  if (request.sites.empty()) throw DomainError("simulate: need at least one site");
  SimulationResult result;
  std::vector<std::vector<double>> rows;
  rows.reserve(request.n);
  if (const auto* lp = std::get_if<LogisticParams>(&request.params)) {
    lp->validate();
    if (request.record_partitions) {
      throw DomainError("simulate: partitions are only recorded for brown_resnick");
    }
    for (std::size_t i = 0; i < request.n; ++i) {
      auto rng = RandomStream::derive(request.seed, {i});
      rows.push_back(logistic_draw(lp->theta, request.sites.size(), rng));
    }
  } else {
    const auto& br = std::get<BrownResnickParams>(request.params);
    validate(request.params, request.sites.size());
    const ExtremalFactors f = extremal_factors(br);
    std::vector<std::uint64_t> ids(request.sites.size());
    for (std::size_t i = 0; i < request.n; ++i) {
      auto rng = RandomStream::derive(request.seed, {i});
      std::vector<double> z(request.sites.size());
      extremal_draw(f, rng, z, ids);
      rows.push_back(std::move(z));
      if (request.record_partitions) result.partitions.push_back(empirical_partition(ids));
    }
  }
  result.data = validate_dataset(request.sites, std::move(rows));
  return result;
}

}  // namespace msvi
