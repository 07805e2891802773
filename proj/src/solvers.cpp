#include "pwsde/solvers.hpp"

namespace pwsde {

std::string_view to_string(Scheme s) { return s == Scheme::em ? "em" : "gm"; }

namespace {

void check_grid(const SdeProblem& problem, const BrownianGrid& grid) {
    problem.validate();
    if (grid.dim() != problem.dim) throw ArgumentError("grid dimension does not match the problem");
    if (grid.horizon() != problem.horizon) throw ArgumentError("grid horizon does not match the problem");
}

}  // namespace

SchemeOutput solve_em(const SdeProblem& problem, const BrownianGrid& grid, std::size_t step_count, double band_eps) {
    check_grid(problem, grid);
    SchemeOutput out;
    out.scheme = Scheme::em;
    out.step_count = step_count;
    out.path = euler_maruyama_path(problem, grid, step_count);
    out.diagnostics.resize(out.path.size());
    if (problem.surface && band_eps > 0.0)
        for (std::size_t j = 0; j < out.path.size(); ++j)
            out.diagnostics[j].in_band = problem.surface->in_band(out.path[j], band_eps);
    return out;
}

SchemeOutput solve_gm(const Transform& transform, const BrownianGrid& grid, std::size_t step_count) {
    const SdeProblem& problem = transform.problem();
    check_grid(problem, grid);
    SchemeOutput out;
    out.scheme = Scheme::gm;
    out.step_count = step_count;
    out.path.reserve(step_count + 1);
    out.transformed_path.reserve(step_count + 1);
    out.diagnostics.reserve(step_count + 1);
    const bool flags = transform.surface().has_value() && transform.c() > 0.0;
    run_gm(transform, grid, step_count, [&](std::size_t, const Vec& x, const Vec& z, int iterations) {
        out.path.push_back(x);
        out.transformed_path.push_back(z);
        out.diagnostics.push_back({flags && transform.surface()->in_band(x, transform.c()), iterations});
    });
    return out;
}

}  // namespace pwsde
