#pragma once

#include "pwsde/sde.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pwsde::problems {

/// Drift (1,1) outside the unit circle and (-x1, x2) on and inside it;
/// diffusion (x1, x2)^T e1^T / (1 + |x|^2), degenerate in the second direction.
SdeProblem circle2d();

/// mu(x) = -sign(x) (value -1 at 0), sigma = 1, jump at 0, x0 = 0.1.
SdeProblem step1d();

/// Geometric Brownian motion mu = a x, sigma = b x with closed-form solution.
SdeProblem gbm1d(double a = 0.5, double b = 0.2);

std::vector<std::string> names();

/// ConfigError listing close matches and all registered names.
SdeProblem lookup(std::string_view name);

}  // namespace pwsde::problems
