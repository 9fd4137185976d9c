#include "msvi/epa.hpp"

#include <fmt/format.h>

#include "msvi/error.hpp"

namespace msvi {

void EpaParams::validate() const {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw DomainError(fmt::format("EPA delta = {} outside [0, 1)", delta));
  }
  if (!(alpha > -delta) || !std::isfinite(alpha)) {
    throw DomainError(fmt::format("EPA alpha = {} must exceed -delta = {}", alpha, -delta));
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw DomainError(fmt::format("EPA rho = {} must be positive", rho));
  }
}

namespace {
void check_shapes(const DistanceMatrix& dist, const SetPartition& partition) {
  if (dist.dim() != partition.dim()) {
    throw DomainError(fmt::format("EPA: distance matrix is {}x{} but partition has {} items",
                                  dist.dim(), dist.dim(), partition.dim()));
  }
}
}  // namespace

double epa_log_pmf(const EpaParams& params, const DistanceMatrix& dist,
                   const SetPartition& partition) {
  params.validate();
  check_shapes(dist, partition);
  return detail::epa_log_pmf_impl(params.alpha, params.delta, params.rho, dist, partition);
}

EpaScore epa_log_pmf_grad(const EpaParams& params, const DistanceMatrix& dist,
                          const SetPartition& partition) {
  params.validate();
  check_shapes(dist, partition);
  using D3 = Dual<3>;
  const D3 r = detail::epa_log_pmf_impl(D3::variable(params.alpha, 0),
                                        D3::variable(params.delta, 1),
                                        D3::variable(params.rho, 2), dist, partition);
  return {r.v, r.d};
}

EpaDraw epa_sample(const EpaParams& params, const DistanceMatrix& dist, RandomStream& rng) {
  params.validate();
  const std::size_t dim = dist.dim();
  std::vector<int> labels(dim, 0);
  std::vector<double> probs;
  double total = 0.0;
  std::size_t num_blocks = dim ? 1 : 0;
  for (std::size_t t = 1; t < dim; ++t) {
    detail::epa_allocation_log_probs(params.alpha, params.delta, params.rho, dist,
                                     labels.data(), t, num_blocks, probs);
    double mass = 0.0;
    for (double lp : probs) mass += std::exp(lp);
    const double u = rng.uniform() * mass;
    std::size_t choice = probs.size() - 1;
    double acc = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
      acc += std::exp(probs[c]);
      if (u < acc) {
        choice = c;
        break;
      }
    }
    labels[t] = static_cast<int>(choice);
    total += probs[choice];
    if (choice == num_blocks) ++num_blocks;
  }
  return {SetPartition::from_labels(std::span<const int>(labels)), total};
}

}  // namespace msvi
