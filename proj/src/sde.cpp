#include "pwsde/sde.hpp"

#include <cmath>

namespace pwsde {

void SdeProblem::validate() const {
    if (dim < 1 || dim > kMaxDim) throw ArgumentError("problem '" + name + "': dimension out of range");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ArgumentError("problem '" + name + "': horizon must be positive");
    if (initial.size() != dim) throw ArgumentError("problem '" + name + "': initial value has the wrong size");
    if (!drift || !diffusion) throw ArgumentError("problem '" + name + "': drift and diffusion are required");
    if (surface && surface->dim() != dim) throw ArgumentError("problem '" + name + "': surface dimension mismatch");
}

std::vector<Vec> euler_maruyama_path(const SdeProblem& problem, const BrownianGrid& grid, std::size_t step_count) {
    problem.validate();
    if (grid.dim() != problem.dim) throw ArgumentError("euler_maruyama_path: grid dimension mismatch");
    if (grid.horizon() != problem.horizon) throw ArgumentError("euler_maruyama_path: grid horizon mismatch");
    std::vector<Vec> path;
    path.reserve(step_count + 1);
    euler_maruyama(problem.drift, problem.diffusion, problem.initial, grid, step_count,
                   [&](std::size_t, const Vec& x) { path.push_back(x); });
    return path;
}

}  // namespace pwsde
