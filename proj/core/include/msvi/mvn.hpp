#pragma once

#include <cstddef>
#include <vector>

#include "msvi/linalg.hpp"
#include "msvi/random.hpp"

namespace msvi {

/// Budget for the randomized-lattice integrator.
///
/// Points are added in doublings (reusing earlier lattice points) until the
/// error estimate drops below `abs_accuracy` or `max_points` points per shift
/// have been used. `abs_accuracy = 0` gives a fixed budget, which makes the
/// result a smooth function of the limits and correlation for a fixed stream.
struct MvnOptions {
  double abs_accuracy = 1e-4;
  std::size_t max_points = 10000;  // per shift
  std::size_t shifts = 12;
};

/// P(X <= upper) for X ~ N(0, correlation).
struct MvnProblem {
  std::vector<double> upper;
  Matrix<double> correlation;
  MvnOptions options;
};

struct MvnResult {
  double probability = 1.0;
  double error = 0.0;  // 3 standard errors across random shifts
};

inline constexpr std::size_t kMaxMvnDim = 40;

/// Genz's separation-of-variables integrand over a randomized Richtmyer
/// lattice. Infinite upper limits are marginalized exactly; dimensions 1 and 2
/// are evaluated in closed form / by the bivariate quadrature (error 0).
/// Throws NumericDomainError if the correlation is not PSD (tolerance 1e-10),
/// DomainError on shape errors or dimension > 40.
MvnResult mvn_cdf(const MvnProblem& problem, RandomStream& rng);

}  // namespace msvi
