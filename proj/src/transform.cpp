#include "pwsde/transform.hpp"

#include "pwsde/errors.hpp"
#include "pwsde/format.hpp"
#include "pwsde/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace pwsde {

namespace {

constexpr double kOnSurface = 1e-12;
constexpr double kNudgeZone = 1e-10;
constexpr double kNudge = 1e-8;
constexpr int kMaxInverseIterations = 200;

double spectral_norm(const Mat& m) {
    if (m.rows() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()[0];
}

}  // namespace

double bump(double u) {
    if (std::abs(u) > 1.0) return 0.0;
    const double w = (1.0 + u) * (1.0 - u);
    return w * w * w;
}

double bump_d1(double u) {
    if (std::abs(u) > 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return -6.0 * u * w * w;
}

double bump_d2(double u) {
    if (std::abs(u) > 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return -6.0 * w * (1.0 - 5.0 * u * u);
}

Profile profile(double s, double c) {
    const double u = s / c;
    if (std::abs(u) >= 1.0) return {0.0, 0.0, 0.0};
    const double a = std::abs(s);
    const double sign = s < 0.0 ? -1.0 : 1.0;
    const double p0 = bump(u);
    const double p1 = bump_d1(u);
    const double p2 = bump_d2(u);
    return {
        s * a * p0,
        2.0 * a * p0 + s * a * p1 / c,
        2.0 * sign * p0 + 4.0 * a * p1 / c + s * a * p2 / (c * c),
    };
}

double alpha_1d(double mu_left, double mu_right, double sigma_at_xi) {
    const double jump = mu_left - mu_right;
    if (jump == 0.0) return 0.0;
    if (sigma_at_xi == 0.0)
        throw ModelError("drift jumps by " + format_double(jump) + " where the diffusion vanishes");
    return jump / (2.0 * sigma_at_xi * sigma_at_xi);
}

Vec alpha_surface(const SdeProblem& problem, const Hypersurface& surface, const Vec& xi, const AlphaOptions& opt) {
    const SurfaceFoot foot = surface.locate(xi);
    const Vec& p = foot.point;
    const Vec& n = foot.normal;
    const auto jump = [&](double h) -> Vec { return problem.drift(p - h * n) - problem.drift(p + h * n); };

    const double h = opt.step;
    const Vec f1 = jump(h);
    const Vec f2 = jump(0.5 * h);
    const Vec f3 = jump(0.25 * h);
    const Vec limit = 2.0 * f2 - f1;
    const Vec check = 2.0 * f3 - f2;
    if (!all_finite(limit) || !all_finite(check))
        throw NumericError("alpha: non-finite drift near the surface");

    const Vec v = problem.diffusion(p).transpose() * n;
    const double nondeg = v.squaredNorm();
    if (!(nondeg >= opt.degeneracy)) {
        if (limit.norm() <= opt.abs_floor) return Vec::Zero(p.size());
        throw ModelError("|sigma^T n|^2 = " + format_double(nondeg) + " below " + format_double(opt.degeneracy) +
                         " at a surface point where the drift jumps");
    }
    const double denom = 2.0 * nondeg;
    Vec alpha = limit / denom;
    const double residual = (limit - check).norm() / denom;
    if (residual > opt.rel_residual * alpha.norm() + opt.abs_floor)
        throw NumericError("alpha: one-sided drift limit does not converge (residual " + format_double(residual) + ")");
    if (alpha.norm() <= opt.abs_floor) alpha.setZero();
    return alpha;
}

Transform Transform::identity(SdeProblem problem) {
    problem.validate();
    Transform t(std::move(problem), Hypersurface::point_set({0.0}), [](const Vec& f) { return Vec::Zero(f.size()); },
                0.0, 0.0);
    t.surface_ = t.problem_.surface;
    t.identity_ = true;
    return t;
}

Transform::Transform(SdeProblem problem, Hypersurface surface, AlphaField alpha, double c, double sup_alpha)
    : problem_(std::move(problem)), surface_(std::move(surface)), alpha_(std::move(alpha)), c_(c),
      sup_alpha_(sup_alpha) {
    fd_step_ = std::max(1e-6, c_ * 1e-5);
    identity_ = !(sup_alpha_ > 0.0);
    report_.c = c_;
    report_.sup_alpha = sup_alpha_;
}

Vec Transform::alpha(const Vec& foot) const {
    if (identity_) return Vec::Zero(dim());
    return alpha_(foot);
}

Vec Transform::displacement(const Vec& x) const {
    if (identity_) return Vec::Zero(x.size());
    const double sd = surface_->signed_distance(x);
    if (!(std::abs(sd) < c_)) return Vec::Zero(x.size());
    const SurfaceFoot foot = surface_->locate(x);
    const double s = foot.signed_distance;
    if (s == 0.0) return Vec::Zero(x.size());
    return alpha_(foot.point) * profile(s, c_).value;
}

// The + or - side piece of G - id, continued smoothly across the surface:
// side * alpha(p(y)) s(y)^2 bump(s(y) / c).
Vec Transform::branch_displacement(const Vec& y, double side) const {
    const SurfaceFoot foot = surface_->locate(y);
    const double s = foot.signed_distance;
    if (!(std::abs(s) < c_)) return Vec::Zero(y.size());
    return alpha_(foot.point) * (side * s * s * bump(s / c_));
}

Transform::Inversion Transform::invert(const Vec& z) const {
    if (identity_) return {z, 0};
    if (surface_->distance(z) >= c_ * (1.0 + 6.0 * sup_alpha_ * c_)) return {z, 0};
    const double tol = 1e-12 * (1.0 + z.norm());
    Vec x = z;
    for (int it = 0; it < kMaxInverseIterations; ++it) {
        const Vec r = z - forward(x);
        if (!all_finite(r)) throw NumericError("inverse: non-finite iterate");
        if (r.norm() <= tol) return {x, it};
        x += r;
    }
    std::string state;
    for (int k = 0; k < z.size(); ++k) state += (k ? "," : "") + format_double(z[k]);
    throw NumericError("inverse: no convergence in " + std::to_string(kMaxInverseIterations) +
                       " iterations at (" + state + "); contraction certificate violated");
}

Transform::Derivatives Transform::derivatives_impl(const Vec& x, const Mat* a) const {
    const int d = dim();
    Derivatives out{Mat::Identity(d, d), Vec::Zero(d)};
    if (identity_) return out;

    const SurfaceFoot foot = surface_->locate(x);
    const double s = foot.signed_distance;
    if (std::abs(s) < kOnSurface) throw DomainError("transform derivatives are undefined on the surface");
    if (std::abs(s) >= c_) return out;

    if (d == 1) {
        const double al = alpha_(foot.point)[0];
        const Profile g = profile(s, c_);
        const double n = foot.normal[0];
        out.jacobian(0, 0) = 1.0 + al * g.d1 * n;
        if (a) out.hessian_term[0] = 0.5 * al * g.d2 * (*a)(0, 0);
        return out;
    }

    const double side = s < 0.0 ? -1.0 : 1.0;
    const double h = fd_step_;
    const Vec center = a ? branch_displacement(x, side) : Vec::Zero(d);
    Vec e = Vec::Zero(d);
    for (int j = 0; j < d; ++j) {
        e.setZero();
        e[j] = h;
        const Vec plus = branch_displacement(x + e, side);
        const Vec minus = branch_displacement(x - e, side);
        out.jacobian.col(j) += (plus - minus) / (2.0 * h);
        if (a) out.hessian_term += 0.5 * (*a)(j, j) * (plus - 2.0 * center + minus) / (h * h);
    }
    if (a) {
        Vec ej = Vec::Zero(d);
        Vec ek = Vec::Zero(d);
        for (int j = 0; j < d; ++j) {
            for (int k = j + 1; k < d; ++k) {
                const double weight = (*a)(j, k) + (*a)(k, j);
                if (weight == 0.0) continue;
                ej.setZero();
                ek.setZero();
                ej[j] = h;
                ek[k] = h;
                const Vec mixed = (branch_displacement(x + ej + ek, side) - branch_displacement(x + ej - ek, side) -
                                   branch_displacement(x - ej + ek, side) + branch_displacement(x - ej - ek, side)) /
                                  (4.0 * h * h);
                out.hessian_term += 0.5 * weight * mixed;
            }
        }
    }
    return out;
}

Mat Transform::jacobian(const Vec& x) const { return derivatives_impl(x, nullptr).jacobian; }

Vec Transform::hessian_apply(const Vec& x, const Mat& a) const { return derivatives_impl(x, &a).hessian_term; }

Transform::Derivatives Transform::derivatives(const Vec& x, const Mat& a) const { return derivatives_impl(x, &a); }

Transform::Coefficients Transform::transformed(const Vec& z) const {
    if (identity_) return {z, problem_.drift(z), problem_.diffusion(z), 0};
    const Inversion inv = invert(z);
    const double s = surface_->signed_distance(inv.x);
    if (!(std::abs(s) < c_)) return {inv.x, problem_.drift(inv.x), problem_.diffusion(inv.x), inv.iterations};

    Vec x = inv.x;
    if (std::abs(s) < kNudgeZone) {
        const double side = s < 0.0 ? -1.0 : 1.0;
        x += (kNudge * side) * surface_->locate(x).normal;
    }
    const Vec mu = problem_.drift(x);
    const Mat sigma = problem_.diffusion(x);
    const Mat a = sigma * sigma.transpose();
    const Derivatives der = derivatives_impl(x, &a);
    return {inv.x, der.jacobian * mu + der.hessian_term, der.jacobian * sigma, inv.iterations};
}

double certificate_norm(const Transform& t, std::uint64_t seed, const TransformOptions& options) {
    if (t.is_identity()) return 0.0;
    const Hypersurface& surface = *t.surface();
    const std::vector<Vec> points =
        surface.sample(options.certificate_surface_points, t.problem().initial, seed, options.sample_radius);
    // Keep at least ~10^3 evaluation points even for small point sets.
    const std::size_t offsets =
        std::max<std::size_t>(options.certificate_offsets, (512 + points.size() - 1) / points.size());
    const double shift = KeyedStream(seed).uniform(7);
    const int d = t.dim();
    double worst = 0.0;
    for (const Vec& xi : points) {
        const Vec n = surface.unit_normal(xi);
        for (std::size_t k = 0; k < offsets; ++k) {
            const double s = t.c() * (static_cast<double>(k) + shift) / static_cast<double>(offsets);
            if (!(s > kOnSurface * 10)) continue;
            for (double side : {-1.0, 1.0}) {
                const Mat j = t.jacobian(xi + side * s * n) - Mat::Identity(d, d);
                worst = std::max(worst, spectral_norm(j));
            }
        }
    }
    return worst;
}

CSelection choose_c(const SdeProblem& problem, const Hypersurface& surface, const AlphaField& alpha,
                    double sup_alpha, const TransformOptions& options) {
    const double inf = std::numeric_limits<double>::infinity();
    const double bound_alpha = sup_alpha > 0.0 ? 1.0 / (6.0 * sup_alpha) : inf;
    double c = std::min(bound_alpha, surface.reach());
    c = std::isfinite(c) ? 0.9 * c : 0.9;

    if (problem.dim == 1 || !(sup_alpha > 0.0)) {
        const Transform t(problem, surface, alpha, c, sup_alpha);
        return {c, certificate_norm(t, options.seed, options), 0};
    }
    for (int halvings = 0; halvings <= options.max_halvings; ++halvings) {
        const Transform t(problem, surface, alpha, c, sup_alpha);
        const double cert = certificate_norm(t, options.seed, options);
        if (cert <= options.certificate_bound) return {c, cert, halvings};
        c *= 0.5;
    }
    throw ConstructionError("choose_c: contraction certificate still above " + format_double(options.certificate_bound) +
                            " after " + std::to_string(options.max_halvings) + " halvings");
}

Transform build_transform(const SdeProblem& problem, const TransformOptions& options) {
    problem.validate();
    if (!problem.surface) return Transform::identity(problem);
    const Hypersurface& surface = *problem.surface;

    TransformReport report;
    const std::vector<Vec> samples = surface.sample(options.surface_samples, problem.initial, options.seed ^ 0xa1fa,
                                                    options.sample_radius);
    report.surface_samples = samples.size();

    AlphaField field;
    double sup_alpha = 0.0;
    if (std::holds_alternative<PointSet1D>(surface.shape()) || problem.dim == 1) {
        // Precomputed per-point offsets, looked up by the projected point.
        auto table = std::make_shared<std::map<double, double>>();
        for (const Vec& xi : samples) {
            const double a = alpha_surface(problem, surface, xi, options.alpha)[0];
            (*table)[xi[0]] = a;
            sup_alpha = std::max(sup_alpha, std::abs(a));
        }
        field = [table](const Vec& foot) {
            if (table->size() == 1) return Vec::Constant(1, table->begin()->second);
            const auto it = table->find(foot[0]);
            if (it == table->end()) throw DomainError("alpha requested away from the surface points");
            return Vec::Constant(1, it->second);
        };
    } else {
        field = [problem, surface, opt = options.alpha](const Vec& foot) {
            return alpha_surface(problem, surface, foot, opt);
        };
        std::vector<Vec> alphas;
        for (const Vec& xi : samples) {
            alphas.push_back(field(xi));
            sup_alpha = std::max(sup_alpha, alphas.back().norm());
        }
        // First-order smoothness of alpha along the surface.
        const KeyedStream stream(options.seed ^ 0x51);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const Vec n = surface.unit_normal(samples[i]);
            Vec dir(problem.dim);
            for (int k = 0; k < problem.dim; ++k) dir[k] = stream.normal(i * kMaxDim + k);
            dir -= dir.dot(n) * n;
            if (!(dir.norm() > 0.0)) continue;
            const Vec moved = surface.project(samples[i] + 1e-4 * dir.normalized());
            const double dist = (moved - samples[i]).norm();
            if (!(dist > 0.0)) continue;
            const double slope = (field(moved) - alphas[i]).norm() / dist;
            if (!std::isfinite(slope)) throw ModelError("alpha is not differentiable along the surface");
            report.alpha_slope = std::max(report.alpha_slope, slope);
        }
    }
    if (!std::isfinite(sup_alpha)) throw ModelError("alpha is unbounded on the surface samples");

    const CSelection sel = choose_c(problem, surface, field, sup_alpha, options);

    // Boundedness of the coefficients in the band, on samples.
    for (const Vec& xi : samples) {
        const Vec n = surface.unit_normal(xi);
        for (double f : {-0.75, -0.25, 0.25, 0.75}) {
            const Vec x = xi + f * sel.c * n;
            const Vec mu = problem.drift(x);
            const Mat sigma = problem.diffusion(x);
            if (!all_finite(mu) || !all_finite(sigma)) throw ModelError("coefficients are not finite near the surface");
            report.drift_bound = std::max(report.drift_bound, mu.norm());
            report.diffusion_bound = std::max(report.diffusion_bound, sigma.norm());
        }
    }

    Transform t(problem, surface, field, sel.c, sup_alpha);
    report.c = sel.c;
    report.sup_alpha = sup_alpha;
    report.certificate = sel.certificate;
    report.halvings = sel.halvings;
    report.certificate_recheck = certificate_norm(t, options.seed ^ 0xf7e5, options);
    if (problem.dim > 1 && report.certificate_recheck > options.certificate_bound)
        throw ConstructionError("contraction certificate fails on the verification grid");
    t.set_report(report);
    return t;
}

Box band_box(const Transform& t, double radius) {
    const int d = t.dim();
    if (!t.surface()) return {Vec::Constant(d, -radius), Vec::Constant(d, radius)};
    const double margin = 2.0 * (t.c() > 0.0 ? t.c() : 1.0);
    const auto& shape = t.surface()->shape();
    if (const auto* ps = std::get_if<PointSet1D>(&shape))
        return {Vec::Constant(1, ps->points.front() - margin), Vec::Constant(1, ps->points.back() + margin)};
    if (const auto* sp = std::get_if<Sphere>(&shape)) {
        const Vec r = Vec::Constant(d, sp->radius + margin);
        return {sp->center - r, sp->center + r};
    }
    const Vec anchor = t.surface()->project(t.problem().initial);
    return {anchor - Vec::Constant(d, radius), anchor + Vec::Constant(d, radius)};
}

double estimate_inverse_lipschitz(const Transform& t, std::size_t n_pairs, std::uint64_t seed) {
    if (t.is_identity() || !t.surface()) return 1.0;
    return lipschitz_quotient_estimate([&](const Vec& z) { return t.inverse(z); }, *t.surface(), band_box(t), n_pairs,
                                       seed, PairPolicy::any);
}

}  // namespace pwsde
