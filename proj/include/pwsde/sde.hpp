#pragma once

#include "pwsde/brownian.hpp"
#include "pwsde/errors.hpp"
#include "pwsde/format.hpp"
#include "pwsde/hypersurface.hpp"
#include "pwsde/linalg.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pwsde {

using DriftFn = std::function<Vec(const Vec&)>;
using DiffusionFn = std::function<Mat(const Vec&)>;
/// Closed-form solution X_t as a function of (X_0, t, W_t), for problems that have one.
using ExactSolutionFn = std::function<Vec(const Vec& initial, double t, const Vec& w)>;

/// dX = mu(X) dt + sigma(X) dW, X_0 = initial on [0, horizon], square diffusion.
///
/// The callables must be total; what they return on the surface itself is
/// the caller's convention.
struct SdeProblem {
    std::string name;
    int dim = 1;
    DriftFn drift;
    DiffusionFn diffusion;
    std::optional<Hypersurface> surface;
    Vec initial;
    double horizon = 1.0;
    ExactSolutionFn exact;

    /// Throws ArgumentError unless dim >= 1, horizon > 0 and sizes agree.
    void validate() const;
};

/// Drives one EM recursion for the given coefficients, calling
/// observer(j, X_j) for j = 0..step_count. Non-finite coefficients raise
/// NumericError naming the step and the state.
///
/// The recursion accumulates the displacement from the initial value, so for
/// constant coefficients on a lattice-valued Brownian grid every nested step
/// count reaches a bit-identical endpoint.
template <class Drift, class Diffusion, class Observer>
void euler_maruyama(const Drift& drift, const Diffusion& diffusion, const Vec& initial,
                    const BrownianGrid& grid, std::size_t step_count, Observer&& observer) {
    const std::size_t block = grid.block_size(step_count);
    const double delta = grid.horizon() / static_cast<double>(step_count);
    Vec x = initial;
    Vec moved = Vec::Zero(initial.size());
    observer(std::size_t{0}, x);
    for (std::size_t j = 0; j < step_count; ++j) {
        const Vec mu = drift(x);
        const Mat sigma = diffusion(x);
        if (!all_finite(mu) || !all_finite(sigma)) {
            std::string state;
            for (int k = 0; k < x.size(); ++k) state += (k ? "," : "") + format_double(x[k]);
            throw NumericError("non-finite coefficient at step " + std::to_string(j) + ", state (" + state + ")");
        }
        const Vec dw = grid.sum(j * block, (j + 1) * block);
        moved += mu * delta + sigma * dw;
        x = initial + moved;
        observer(j + 1, x);
    }
}

/// X_0 = x, X_{j+1} = X_j + mu(X_j) delta + sigma(X_j) dW_j; returns step_count + 1 states.
std::vector<Vec> euler_maruyama_path(const SdeProblem& problem, const BrownianGrid& grid, std::size_t step_count);

}  // namespace pwsde
