#pragma once

#include "pwsde/solvers.hpp"
#include "pwsde/transform.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pwsde {

struct ConvergenceRow {
    double delta = 0.0;
    /// sqrt of the mean over paths of max_j |X_ref(t_j) - X^delta_j|^2.
    double error = 0.0;
    std::size_t n_paths = 0;
    /// 95% normal half-width of the mean squared maximum, mapped to the
    /// error scale by the delta method.
    double ci_half_width = 0.0;
};

struct ConvergenceReport {
    std::string problem;
    Scheme scheme = Scheme::em;
    /// Decreasing delta.
    std::vector<ConvergenceRow> rows;
    double fitted_order = 0.0;
    double intercept = 0.0;
    double reference_delta = 0.0;
};

enum class Reference {
    /// GM at step T 2^-ref_levels on the same Brownian path.
    gm_fine,
    /// The problem's closed-form solution evaluated on the coupled path.
    exact,
};

struct StrongErrorOptions {
    std::size_t n_paths = 1000;
    std::uint64_t master_seed = 0;
    int ref_levels = 16;
    Reference reference = Reference::gm_fine;
    /// Minimum ratio between the smallest tested step and the reference step.
    std::size_t min_refinement = 4;
    unsigned threads = 0;
};

/// Step count T / delta; ArgumentError unless it is a power of two.
std::size_t dyadic_step_count(double horizon, double delta);

/// Per-path seed of path i.
std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path_index);

/// Strong L2 errors of each scheme at each delta against a coupled reference,
/// one report per scheme, with fitted orders. All schemes share the
/// reference path and Brownian grid of each path.
std::vector<ConvergenceReport> strong_error(const Transform& transform, std::span<const Scheme> schemes,
                                            std::span<const double> deltas, const StrongErrorOptions& options);
ConvergenceReport strong_error(const Transform& transform, Scheme scheme, std::span<const double> deltas,
                               const StrongErrorOptions& options);

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least squares of log2(error) on log2(delta). Rows with error <= 0 are
/// dropped with a warning on stderr; fewer than 3 usable rows is an
/// ArgumentError.
OrderFit fit_order(std::span<const ConvergenceRow> rows);
inline OrderFit fit_order(const ConvergenceReport& report) { return fit_order(report.rows); }

struct OccupationRow {
    double eps = 0.0;
    double delta = 0.0;
    /// Mean over paths of delta * #{j < N : X^delta_j within eps of the surface}.
    double occupation = 0.0;
    std::size_t n_paths = 0;
};

struct OccupationReport {
    /// Increasing eps.
    std::vector<OccupationRow> rows;
    /// occupation(eps_{k+1}) / occupation(eps_k).
    std::vector<double> ratios;
};

OccupationReport occupation_time(const SdeProblem& problem, double delta, std::span<const double> eps_list,
                                 std::size_t n_paths, std::uint64_t master_seed, unsigned threads = 0);

struct ExcursionRow {
    double eps = 0.0;
    double delta = 0.0;
    double probability = 0.0;
    std::size_t n_paths = 0;
};

/// P(some step's interpolated EM increment exceeds eps in norm), the
/// interpolation probed at `bridge_points` equally spaced times per step
/// using the finer levels of the Brownian grid.
std::vector<ExcursionRow> excursion_probability(const SdeProblem& problem, double delta,
                                                std::span<const double> eps_list, std::size_t n_paths,
                                                std::uint64_t master_seed, unsigned threads = 0,
                                                int bridge_points = 8);
double excursion_probability(const SdeProblem& problem, double delta, double eps, std::size_t n_paths,
                             std::uint64_t master_seed, unsigned threads = 0);

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);
void write_occupation_csv(std::ostream& out, const OccupationReport& report);
void write_excursion_csv(std::ostream& out, std::span<const ExcursionRow> rows);

}  // namespace pwsde
