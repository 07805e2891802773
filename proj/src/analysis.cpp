#include "pwsde/analysis.hpp"

#include "pwsde/errors.hpp"
#include "pwsde/format.hpp"
#include "pwsde/parallel.hpp"
#include "pwsde/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iostream>
#include <ostream>

namespace pwsde {

namespace {

constexpr double kZ95 = 1.959963984540054;

struct Moments {
    double mean = 0.0;
    double half_width = 0.0;
};

// Index-ordered reduction, so results do not depend on scheduling.
Moments moments(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, kZ95 * std::sqrt(var / n)};
}

}  // namespace

std::size_t dyadic_step_count(double horizon, double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ArgumentError("step size must be positive");
    const double ratio = horizon / delta;
    const double rounded = std::nearbyint(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded || rounded > std::ldexp(1.0, kMaxLevels))
        throw ArgumentError("step " + format_double(delta) + " does not divide the horizon into a dyadic count");
    const auto n = static_cast<std::size_t>(rounded);
    if (!std::has_single_bit(n))
        throw ArgumentError("step " + format_double(delta) + " gives " + std::to_string(n) +
                            " steps, not a power of two");
    return n;
}

std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path_index) {
    return derive_key(master_seed, path_index);
}

std::vector<ConvergenceReport> strong_error(const Transform& transform, std::span<const Scheme> schemes,
                                            std::span<const double> deltas, const StrongErrorOptions& options) {
    const SdeProblem& problem = transform.problem();
    problem.validate();
    if (options.n_paths < 1) throw ArgumentError("strong_error: n_paths must be >= 1");
    if (schemes.empty() || deltas.empty()) throw ArgumentError("strong_error: schemes and deltas are required");
    if (options.ref_levels < 0 || options.ref_levels > kMaxLevels)
        throw ArgumentError("strong_error: ref_levels out of range");
    if (options.reference == Reference::exact && !problem.exact)
        throw ArgumentError("strong_error: problem '" + problem.name + "' has no closed-form solution");

    const std::size_t ref_steps = std::size_t{1} << options.ref_levels;
    std::vector<double> sorted(deltas.begin(), deltas.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::vector<std::size_t> counts;
    for (double d : sorted) {
        const std::size_t n = dyadic_step_count(problem.horizon, d);
        if (ref_steps % n != 0 || ref_steps / n < options.min_refinement)
            throw ArgumentError("step " + format_double(d) + " is not nested at least " +
                                std::to_string(options.min_refinement) + "x inside the reference step");
        counts.push_back(n);
    }
    const std::size_t finest = counts.back();
    const std::size_t ref_stride = ref_steps / finest;

    // sq_max[s][k][i]: squared maximum deviation of scheme s at delta k on path i.
    std::vector<std::vector<std::vector<double>>> sq_max(
        schemes.size(), std::vector<std::vector<double>>(counts.size(), std::vector<double>(options.n_paths)));

    parallel_for(options.n_paths, options.threads, [&](std::size_t i) {
        const BrownianGrid grid = sample_brownian(path_seed(options.master_seed, i), problem.dim, problem.horizon,
                                                  options.ref_levels);
        std::vector<Vec> reference(finest + 1);
        if (options.reference == Reference::gm_fine) {
            run_gm(transform, grid, ref_steps, [&](std::size_t j, const Vec& x, const Vec&, int) {
                if (j % ref_stride == 0) reference[j / ref_stride] = x;
            });
        } else {
            Vec w = Vec::Zero(problem.dim);
            const double dt = problem.horizon / static_cast<double>(finest);
            reference[0] = problem.exact(problem.initial, 0.0, w);
            for (std::size_t j = 0; j < finest; ++j) {
                w += grid.sum(j * ref_stride, (j + 1) * ref_stride);
                reference[j + 1] = problem.exact(problem.initial, dt * static_cast<double>(j + 1), w);
            }
        }
        for (std::size_t s = 0; s < schemes.size(); ++s) {
            for (std::size_t k = 0; k < counts.size(); ++k) {
                const std::size_t stride = finest / counts[k];
                double worst = 0.0;
                const auto track = [&](std::size_t j, const Vec& x) {
                    worst = std::max(worst, (x - reference[j * stride]).squaredNorm());
                };
                if (schemes[s] == Scheme::em)
                    euler_maruyama(problem.drift, problem.diffusion, problem.initial, grid, counts[k], track);
                else
                    run_gm(transform, grid, counts[k],
                           [&](std::size_t j, const Vec& x, const Vec&, int) { track(j, x); });
                sq_max[s][k][i] = worst;
            }
        }
    });

    std::vector<ConvergenceReport> reports;
    for (std::size_t s = 0; s < schemes.size(); ++s) {
        ConvergenceReport report;
        report.problem = problem.name;
        report.scheme = schemes[s];
        report.reference_delta = problem.horizon / static_cast<double>(ref_steps);
        for (std::size_t k = 0; k < counts.size(); ++k) {
            const Moments m = moments(sq_max[s][k]);
            const double error = std::sqrt(m.mean);
            report.rows.push_back({sorted[k], error, options.n_paths, error > 0.0 ? m.half_width / (2.0 * error) : 0.0});
        }
        std::size_t usable = 0;
        for (const auto& r : report.rows) usable += r.error > 0.0 ? 1 : 0;
        if (usable >= 3) {
            const OrderFit fit = fit_order(report.rows);
            report.fitted_order = fit.slope;
            report.intercept = fit.intercept;
        } else {
            report.fitted_order = std::nan("");
            report.intercept = std::nan("");
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

ConvergenceReport strong_error(const Transform& transform, Scheme scheme, std::span<const double> deltas,
                               const StrongErrorOptions& options) {
    const Scheme schemes[] = {scheme};
    return strong_error(transform, schemes, deltas, options).front();
}

OrderFit fit_order(std::span<const ConvergenceRow> rows) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
        if (r.error > 0.0 && r.delta > 0.0 && std::isfinite(r.error))
            pts.emplace_back(std::log2(r.delta), std::log2(r.error));
        else
            std::cerr << "warning: fit_order drops row delta=" << format_double(r.delta)
                      << " error=" << format_double(r.error) << "\n";
    }
    if (pts.size() < 3) throw ArgumentError("fit_order: at least 3 rows with positive error are required");
    const double n = static_cast<double>(pts.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if (!(sxx > 0.0)) throw ArgumentError("fit_order: step sizes must not all coincide");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

OccupationReport occupation_time(const SdeProblem& problem, double delta, std::span<const double> eps_list,
                                 std::size_t n_paths, std::uint64_t master_seed, unsigned threads) {
    problem.validate();
    if (!problem.surface) throw ArgumentError("occupation_time: problem '" + problem.name + "' has no surface");
    if (n_paths < 1 || eps_list.empty()) throw ArgumentError("occupation_time: need paths and eps values");
    std::vector<double> eps(eps_list.begin(), eps_list.end());
    std::sort(eps.begin(), eps.end());
    for (double e : eps)
        if (!(e > 0.0) || e > problem.surface->reach())
            throw ArgumentError("occupation_time: eps " + format_double(e) + " must lie in (0, reach]");
    const std::size_t steps = dyadic_step_count(problem.horizon, delta);
    const int levels = std::countr_zero(steps);
    const Hypersurface& surface = *problem.surface;

    std::vector<std::vector<double>> counts(eps.size(), std::vector<double>(n_paths));
    parallel_for(n_paths, threads, [&](std::size_t i) {
        const BrownianGrid grid = sample_brownian(path_seed(master_seed, i), problem.dim, problem.horizon, levels);
        std::vector<std::size_t> hits(eps.size(), 0);
        euler_maruyama(problem.drift, problem.diffusion, problem.initial, grid, steps, [&](std::size_t j, const Vec& x) {
            if (j == steps) return;
            const double dist = surface.distance(x);
            for (std::size_t k = 0; k < eps.size(); ++k)
                if (dist < eps[k]) ++hits[k];
        });
        for (std::size_t k = 0; k < eps.size(); ++k) counts[k][i] = delta * static_cast<double>(hits[k]);
    });

    OccupationReport report;
    for (std::size_t k = 0; k < eps.size(); ++k)
        report.rows.push_back({eps[k], delta, moments(counts[k]).mean, n_paths});
    for (std::size_t k = 1; k < report.rows.size(); ++k)
        report.ratios.push_back(report.rows[k].occupation / report.rows[k - 1].occupation);
    return report;
}

std::vector<ExcursionRow> excursion_probability(const SdeProblem& problem, double delta,
                                                std::span<const double> eps_list, std::size_t n_paths,
                                                std::uint64_t master_seed, unsigned threads, int bridge_points) {
    problem.validate();
    if (n_paths < 1 || eps_list.empty()) throw ArgumentError("excursion_probability: need paths and eps values");
    for (double e : eps_list)
        if (!(e > 0.0)) throw ArgumentError("excursion_probability: eps must be positive");
    if (bridge_points < 1 || !std::has_single_bit(static_cast<unsigned>(bridge_points)))
        throw ArgumentError("excursion_probability: bridge points must be a power of two");
    const std::size_t steps = dyadic_step_count(problem.horizon, delta);
    const int sub_levels = std::countr_zero(static_cast<unsigned>(bridge_points));
    const int levels = std::countr_zero(steps) + sub_levels;
    if (levels > kMaxLevels) throw ArgumentError("excursion_probability: step too small for bridge refinement");
    const auto sub = static_cast<std::size_t>(bridge_points);
    const double dt = delta / static_cast<double>(sub);

    std::vector<double> largest(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        const BrownianGrid grid = sample_brownian(path_seed(master_seed, i), problem.dim, problem.horizon, levels);
        Vec x = problem.initial;
        double worst = 0.0;
        for (std::size_t j = 0; j < steps; ++j) {
            const Vec mu = problem.drift(x);
            const Mat sigma = problem.diffusion(x);
            if (!all_finite(mu) || !all_finite(sigma))
                throw NumericError("excursion: non-finite coefficient at step " + std::to_string(j));
            Vec w = Vec::Zero(problem.dim);
            Vec move;
            for (std::size_t k = 1; k <= sub; ++k) {
                w += grid.sum(j * sub + k - 1, j * sub + k);
                move = mu * (dt * static_cast<double>(k)) + sigma * w;
                worst = std::max(worst, move.norm());
            }
            x += move;
        }
        largest[i] = worst;
    });

    std::vector<ExcursionRow> rows;
    for (double e : eps_list) {
        std::size_t exceed = 0;
        for (double m : largest) exceed += m > e ? 1 : 0;
        rows.push_back({e, delta, static_cast<double>(exceed) / static_cast<double>(n_paths), n_paths});
    }
    return rows;
}

double excursion_probability(const SdeProblem& problem, double delta, double eps, std::size_t n_paths,
                             std::uint64_t master_seed, unsigned threads) {
    const double list[] = {eps};
    return excursion_probability(problem, delta, list, n_paths, master_seed, threads).front().probability;
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
    out << "delta,error,n_paths,ci_half_width\n";
    for (const auto& r : report.rows)
        out << format_double(r.delta) << ',' << format_double(r.error) << ',' << r.n_paths << ','
            << format_double(r.ci_half_width) << '\n';
    out << "# fitted_order=" << format_double(report.fitted_order) << " intercept=" << format_double(report.intercept)
        << '\n';
}

void write_occupation_csv(std::ostream& out, const OccupationReport& report) {
    out << "eps,delta,occupation,n_paths\n";
    for (const auto& r : report.rows)
        out << format_double(r.eps) << ',' << format_double(r.delta) << ',' << format_double(r.occupation) << ','
            << r.n_paths << '\n';
}

void write_excursion_csv(std::ostream& out, std::span<const ExcursionRow> rows) {
    out << "eps,delta,probability,n_paths\n";
    for (const auto& r : rows)
        out << format_double(r.eps) << ',' << format_double(r.delta) << ',' << format_double(r.probability) << ','
            << r.n_paths << '\n';
}

}  // namespace pwsde
