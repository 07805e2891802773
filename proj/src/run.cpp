#include "pwsde/run.hpp"

#include "pwsde/analysis.hpp"
#include "pwsde/errors.hpp"
#include "pwsde/format.hpp"
#include "pwsde/parallel.hpp"
#include "pwsde/rng.hpp"
#include "pwsde/solvers.hpp"
#include "pwsde/transform.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <ostream>

namespace pwsde {

namespace {

std::vector<Scheme> schemes_of(SchemeChoice choice) {
    switch (choice) {
    case SchemeChoice::em: return {Scheme::em};
    case SchemeChoice::gm: return {Scheme::gm};
    case SchemeChoice::both: return {Scheme::em, Scheme::gm};
    }
    return {};
}

std::ofstream open_output(const std::string& path, std::vector<std::string>& files) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    files.push_back(path);
    return f;
}

void write_sidecar(const std::string& path, const SdeProblem& problem, const Transform& t,
                   std::vector<std::string>& files) {
    std::ofstream f = open_output(path, files);
    const TransformReport& r = t.report();
    f << "problem=" << problem.name << '\n';
    f << "surface=" << problem.surface->describe() << '\n';
    f << "c=" << format_double(r.c) << '\n';
    f << "sup_alpha=" << format_double(r.sup_alpha) << '\n';
    f << "certificate_norm=" << format_double(r.certificate) << '\n';
    f << "certificate_recheck=" << format_double(r.certificate_recheck) << '\n';
    f << "halvings=" << r.halvings << '\n';
    f << "surface_samples=" << r.surface_samples << '\n';
    f << "alpha_slope=" << format_double(r.alpha_slope) << '\n';
    f << "drift_bound=" << format_double(r.drift_bound) << '\n';
    f << "diffusion_bound=" << format_double(r.diffusion_bound) << '\n';
    f << "inverse_lipschitz_estimate=" << format_double(estimate_inverse_lipschitz(t, 2000, 17)) << '\n';
}

double band_eps(const Transform& t) { return t.surface() ? t.c() : 0.0; }

void run_simulate(const ExperimentConfig& c, const SdeProblem& p, const Transform& t, const std::string& prefix,
                  std::ostream& out, RunResult& result) {
    const double delta = c.delta.value_or(std::ldexp(1.0, -10));
    const std::size_t steps = dyadic_step_count(p.horizon, delta);
    const BrownianGrid grid = sample_brownian(path_seed(c.seed, 0), p.dim, p.horizon, std::countr_zero(steps));
    for (Scheme s : schemes_of(c.scheme)) {
        const SchemeOutput o = s == Scheme::em ? solve_em(p, grid, steps, band_eps(t)) : solve_gm(t, grid, steps);
        const std::string path = prefix + "." + std::string(to_string(s)) + ".csv";
        std::ofstream f = open_output(path, result.files);
        f << 't';
        for (int k = 0; k < p.dim; ++k) f << ",x" << k + 1;
        f << ",in_band\n";
        for (std::size_t j = 0; j < o.path.size(); ++j) {
            f << format_double(delta * static_cast<double>(j));
            for (int k = 0; k < p.dim; ++k) f << ',' << format_double(o.path[j][k]);
            f << ',' << (o.diagnostics[j].in_band ? 1 : 0) << '\n';
        }
        out << to_string(s) << ": " << o.path.size() << " grid values -> " << path << '\n';
    }
}

void run_convergence(const ExperimentConfig& c, const Transform& t, const std::string& prefix, std::ostream& out,
                     RunResult& result) {
    std::vector<double> deltas = c.deltas;
    if (deltas.empty())
        for (int k = 6; k <= 12; ++k) deltas.push_back(std::ldexp(1.0, -k));
    StrongErrorOptions opt;
    opt.n_paths = c.paths;
    opt.master_seed = c.seed;
    opt.ref_levels = c.ref_levels;
    const std::vector<Scheme> schemes = schemes_of(c.scheme);
    const auto reports = strong_error(t, schemes, deltas, opt);
    for (const auto& r : reports) {
        const std::string path = prefix + "." + std::string(to_string(r.scheme)) + ".csv";
        std::ofstream f = open_output(path, result.files);
        write_convergence_csv(f, r);
        out << to_string(r.scheme) << " fitted_order=" << format_double(r.fitted_order)
            << " intercept=" << format_double(r.intercept) << " -> " << path << '\n';
    }
}

void run_occupation(const ExperimentConfig& c, const SdeProblem& p, const std::string& prefix, std::ostream& out,
                    RunResult& result) {
    const std::vector<double> eps = c.eps.empty() ? std::vector<double>{0.02, 0.04, 0.08} : c.eps;
    const OccupationReport r =
        occupation_time(p, c.delta.value_or(std::ldexp(1.0, -10)), eps, c.paths, c.seed);
    const std::string path = prefix + ".csv";
    std::ofstream f = open_output(path, result.files);
    write_occupation_csv(f, r);
    out << "ratios:";
    for (double q : r.ratios) out << ' ' << format_double(q);
    out << " -> " << path << '\n';
}

void run_excursion(const ExperimentConfig& c, const SdeProblem& p, const std::string& prefix, std::ostream& out,
                   RunResult& result) {
    const std::vector<double> eps = c.eps.empty() ? std::vector<double>{0.1, 0.5} : c.eps;
    const auto rows = excursion_probability(p, c.delta.value_or(std::ldexp(1.0, -10)), eps, c.paths, c.seed);
    const std::string path = prefix + ".csv";
    std::ofstream f = open_output(path, result.files);
    write_excursion_csv(f, rows);
    for (const auto& r : rows) out << "eps=" << format_double(r.eps) << " probability=" << format_double(r.probability) << '\n';
}

void run_dump(const ExperimentConfig& c, const SdeProblem& p, const Transform& t, const std::string& prefix,
              std::ostream& out, RunResult& result) {
    const int d = p.dim;
    std::vector<Vec> points;
    const std::size_t n = c.grid;
    const auto lerp = [n](double lo, double hi, std::size_t i) {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    const Box box = band_box(t);
    if (d <= 2) {
        const std::size_t ny = d == 2 ? n : 1;
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix) {
                Vec x(d);
                x[0] = lerp(box.lower[0], box.upper[0], ix);
                if (d == 2) x[1] = lerp(box.lower[1], box.upper[1], iy);
                points.push_back(x);
            }
    } else {
        const Vec xi = p.surface ? p.surface->project(p.initial) : p.initial;
        const Vec normal = p.surface ? p.surface->unit_normal(xi) : Vec::Unit(d, 0);
        const double reach = 2.0 * (t.c() > 0.0 ? t.c() : 1.0);
        for (std::size_t i = 0; i < n; ++i) points.push_back(xi + lerp(-reach, reach, i) * normal);
    }

    const std::string path = prefix + ".csv";
    std::ofstream f = open_output(path, result.files);
    for (int k = 0; k < d; ++k) f << (k ? "," : "") << 'x' << k + 1;
    for (int k = 0; k < d; ++k) f << ",G" << k + 1;
    f << ",det_jacobian\n";
    double min_det = std::numeric_limits<double>::infinity();
    for (const Vec& x : points) {
        const Vec g = t.forward(x);
        Vec probe = x;
        if (t.surface() && !t.is_identity()) {
            const double s = t.surface()->signed_distance(x);
            if (std::abs(s) < 1e-10) probe += (s < 0.0 ? -1e-8 : 1e-8) * t.surface()->locate(x).normal;
        }
        const double det = t.jacobian(probe).determinant();
        min_det = std::min(min_det, det);
        for (int k = 0; k < d; ++k) f << (k ? "," : "") << format_double(x[k]);
        for (int k = 0; k < d; ++k) f << ',' << format_double(g[k]);
        f << ',' << format_double(det) << '\n';
    }
    out << points.size() << " points, min det_jacobian=" << format_double(min_det) << " -> " << path << '\n';
}

}  // namespace

std::string output_prefix(const ExperimentConfig& c) {
    std::string prefix = c.out;
    if (prefix.empty()) return std::string(to_string(c.command)) + "_" + c.problem;
    if (prefix.size() > 4 && prefix.substr(prefix.size() - 4) == ".csv") prefix.resize(prefix.size() - 4);
    return prefix;
}

int report_error(const std::exception& e, std::ostream& err) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e)) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (dynamic_cast<const ModelError*>(&e)) {
        err << "model assumption violated: " << e.what() << '\n';
        return kExitModel;
    }
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
}

RunResult run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
    RunResult result;
    try {
        const SdeProblem problem = resolve_problem(c);
        problem.validate();
        const std::string prefix = output_prefix(c);
        const Transform t = build_transform(problem);
        if (problem.surface && c.command != Command::occupation && c.command != Command::excursion)
            write_sidecar(prefix + ".transform.txt", problem, t, result.files);

        switch (c.command) {
        case Command::simulate: run_simulate(c, problem, t, prefix, out, result); break;
        case Command::convergence: run_convergence(c, t, prefix, out, result); break;
        case Command::occupation: run_occupation(c, problem, prefix, out, result); break;
        case Command::excursion: run_excursion(c, problem, prefix, out, result); break;
        case Command::dump_transform: run_dump(c, problem, t, prefix, out, result); break;
        }
    } catch (const std::exception& e) {
        result.exit_code = report_error(e, err);
    }
    return result;
}

}  // namespace pwsde
