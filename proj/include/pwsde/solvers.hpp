#pragma once

#include "pwsde/brownian.hpp"
#include "pwsde/sde.hpp"
#include "pwsde/transform.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace pwsde {

enum class Scheme { em, gm };

std::string_view to_string(Scheme s);

struct StepDiagnostics {
    bool in_band = false;
    int inversion_iterations = 0;
};

/// Grid values of one approximation in original coordinates.
struct SchemeOutput {
    Scheme scheme = Scheme::em;
    std::size_t step_count = 0;
    std::vector<Vec> path;
    /// GM only: the EM iterates Z_j of the transformed equation.
    std::vector<Vec> transformed_path;
    std::vector<StepDiagnostics> diagnostics;
};

/// Streams the GM scheme: Z_0 = G(x), EM on (mu~, sigma~), X_j = G^{-1}(Z_j).
/// observer(j, X_j, Z_j, inversion_iterations) for j = 0..step_count.
template <class Observer>
void run_gm(const Transform& t, const BrownianGrid& grid, std::size_t step_count, Observer&& observer) {
    const std::size_t block = grid.block_size(step_count);
    const double delta = grid.horizon() / static_cast<double>(step_count);
    // Same displacement accumulation as euler_maruyama, so both schemes round
    // identically while the path stays clear of the band.
    const Vec z0 = t.forward(t.problem().initial);
    Vec z = z0;
    Vec moved = Vec::Zero(z0.size());
    for (std::size_t j = 0;; ++j) {
        if (j == step_count) {
            const Transform::Inversion inv = t.invert(z);
            observer(j, inv.x, z, inv.iterations);
            break;
        }
        const Transform::Coefficients coef = t.transformed(z);
        // path[0] is the initial value itself, not its round trip through G.
        observer(j, j == 0 ? t.problem().initial : coef.x, z, coef.iterations);
        if (!all_finite(coef.drift) || !all_finite(coef.diffusion))
            throw NumericError("GM: non-finite transformed coefficient at step " + std::to_string(j));
        moved += coef.drift * delta + coef.diffusion * grid.sum(j * block, (j + 1) * block);
        z = z0 + moved;
    }
}

/// Plain EM on the original coefficients; band flags at band_eps (no flags
/// without a surface or with band_eps <= 0).
SchemeOutput solve_em(const SdeProblem& problem, const BrownianGrid& grid, std::size_t step_count,
                      double band_eps = 0.0);

/// Algorithm GM: the same Brownian increments as solve_em, path mapped back
/// through G^{-1}; band flags at the transform's c.
SchemeOutput solve_gm(const Transform& transform, const BrownianGrid& grid, std::size_t step_count);

}  // namespace pwsde
