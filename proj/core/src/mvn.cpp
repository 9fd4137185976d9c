#include "msvi/mvn.hpp"

#include <cmath>

#include "msvi/mvn_impl.hpp"

namespace msvi {

namespace detail {

const std::array<double, kMaxMvnDim>& richtmyer_generators() {
  static const std::array<double, kMaxMvnDim> gens = [] {
    std::array<double, kMaxMvnDim> g{};
    std::size_t count = 0;
    for (int p = 2; count < kMaxMvnDim; ++p) {
      bool prime = true;
      for (int q = 2; q * q <= p; ++q) {
        if (p % q == 0) {
          prime = false;
          break;
        }
      }
      if (prime) g[count++] = std::sqrt(static_cast<double>(p));
    }
    return g;
  }();
  return gens;
}

}  // namespace detail

MvnResult mvn_cdf(const MvnProblem& problem, RandomStream& rng) {
  const std::size_t n = problem.upper.size();
  const auto& r = problem.correlation;
  if (r.rows() != n || r.cols() != n) {
    throw DomainError(fmt::format("mvn_cdf: correlation is {}x{} but {} limits were given",
                                  r.rows(), r.cols(), n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(r(i, i) - 1.0) > 1e-10) {
      throw DomainError(fmt::format("mvn_cdf: correlation diagonal entry {} is {}", i, r(i, i)));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (std::fabs(r(i, j) - r(j, i)) > 1e-12) {
        throw DomainError("mvn_cdf: correlation matrix is not symmetric");
      }
    }
  }
  if (!cholesky(r, 1e-10)) {
    throw NumericDomainError("mvn_cdf: correlation matrix is not positive semidefinite");
  }
  const auto res = detail::mvn_cdf_t<double>(problem.upper, r, problem.options, rng);
  return {std::clamp(res.probability, 0.0, 1.0), res.error};
}

}  // namespace msvi
