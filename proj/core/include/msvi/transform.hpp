#pragma once

#include <array>
#include <span>
#include <vector>

#include "msvi/epa.hpp"
#include "msvi/model.hpp"

namespace msvi {

// Bijections between constrained parameters and R^k used by the optimizer.
//
//   theta      = sigmoid(u)            u = 0  ->  0.5
//   range      = exp(u)                u = 0  ->  1
//   smoothness = 2 sigmoid(u)          u = 0  ->  1
//   delta      = sigmoid(u_delta)      u = 0  ->  0.5
//   alpha      = exp(u_alpha) - delta  u = 0  ->  0.5 (with delta = 0.5)
//   rho        = exp(u_rho)            u = 0  ->  1
//
// Boundary values (theta = 1, smoothness = 2, delta = 0, ...) have no finite
// preimage and are rejected by unconstrain with a DomainError.

std::vector<double> unconstrain(const ModelParams& params);
/// `like` supplies the model kind and the Brown-Resnick site setup.
ModelParams constrain(const ModelParams& like, std::span<const double> u);
/// Maps a gradient in constrained coordinates to unconstrained coordinates.
std::vector<double> unconstrained_gradient(const ModelParams& params,
                                           std::span<const double> grad);

std::array<double, 3> unconstrain(const EpaParams& params);
EpaParams constrain_epa(std::span<const double, 3> u);
std::array<double, 3> unconstrained_gradient(const EpaParams& params,
                                             const std::array<double, 3>& grad);

}  // namespace msvi
