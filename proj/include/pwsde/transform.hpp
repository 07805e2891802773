#pragma once

#include "pwsde/hypersurface.hpp"
#include "pwsde/linalg.hpp"
#include "pwsde/lipschitz.hpp"
#include "pwsde/sde.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace pwsde {

/// Polynomial bump (1+u)^3 (1-u)^3 on [-1, 1], zero outside; C^2 at +-1.
double bump(double u);
double bump_d1(double u);
double bump_d2(double u);

/// g(s) = s |s| bump(s / c) and its derivatives in s; G(x) = x + alpha g(s)
/// with s the signed distance of x to the surface.
struct Profile {
    double value;
    double d1;
    double d2;
};
Profile profile(double s, double c);

/// (mu_left - mu_right) / (2 sigma^2). ModelError if sigma vanishes while
/// the drift jumps.
double alpha_1d(double mu_left, double mu_right, double sigma_at_xi);

struct AlphaOptions {
    /// Largest one-sided offset; the limit is extrapolated from h and h/2.
    double step = 1e-4;
    /// Lower bound c0 on |sigma(xi)^T n(xi)|^2.
    double degeneracy = 1e-8;
    /// Allowed extrapolation residual relative to |alpha|.
    double rel_residual = 1e-5;
    /// Absolute floor: residuals and |alpha| below this count as zero.
    double abs_floor = 1e-9;
};

/// Jump-offset field at a surface point,
///   lim_{h->0} (mu(xi - h n) - mu(xi + h n)) / (2 |sigma(xi)^T n|^2).
/// The one-sided difference is Richardson-extrapolated from h and h/2; the
/// same extrapolation from h/2 and h/4 serves as the residual check.
Vec alpha_surface(const SdeProblem& problem, const Hypersurface& surface, const Vec& xi,
                  const AlphaOptions& options = {});

using AlphaField = std::function<Vec(const Vec& foot)>;

/// Parameters recorded while building and certifying a transform.
struct TransformReport {
    double c = 0.0;
    double sup_alpha = 0.0;
    /// Max |J(G) - I| over the certification grid and over a fresh grid.
    double certificate = 0.0;
    double certificate_recheck = 0.0;
    int halvings = 0;
    std::size_t surface_samples = 0;
    /// Largest tangential difference quotient of alpha along the surface.
    double alpha_slope = 0.0;
    double drift_bound = 0.0;
    double diffusion_bound = 0.0;
};

/// The map G(x) = x + alpha(p(x)) (x - p(x)).n(p(x)) |x - p(x)| bump(|x - p(x)| / c)
/// together with its inverse, derivatives and the transformed coefficients.
///
/// G is the identity outside the band of half-width c around the surface. In
/// one dimension derivatives are closed-form; otherwise they are central
/// differences of the branch of G belonging to the side of the evaluation
/// point, so stencils never see the jump of G'' across the surface.
class Transform {
public:
    /// G = id; transformed coefficients are the original ones.
    static Transform identity(SdeProblem problem);

    Transform(SdeProblem problem, Hypersurface surface, AlphaField alpha, double c, double sup_alpha);

    bool is_identity() const noexcept { return identity_; }
    int dim() const noexcept { return problem_.dim; }
    double c() const noexcept { return c_; }
    double sup_alpha() const noexcept { return sup_alpha_; }
    const SdeProblem& problem() const noexcept { return problem_; }
    const std::optional<Hypersurface>& surface() const noexcept { return surface_; }
    const TransformReport& report() const noexcept { return report_; }
    void set_report(const TransformReport& report) { report_ = report; }

    Vec alpha(const Vec& foot) const;

    /// G(x) - x.
    Vec displacement(const Vec& x) const;
    Vec forward(const Vec& x) const { return x + displacement(x); }

    struct Inversion {
        Vec x;
        int iterations = 0;
    };
    /// Fixed point x <- z - (G(x) - x) to |G(x) - z| <= 1e-12 (1 + |z|).
    /// Points provably outside the image of the band pass through unchanged.
    Inversion invert(const Vec& z) const;
    Vec inverse(const Vec& z) const { return invert(z).x; }

    /// DomainError on the surface (|signed distance| < 1e-12).
    Mat jacobian(const Vec& x) const;
    /// Component i: 1/2 sum_jk d^2 G_i / dx_j dx_k A_jk.
    Vec hessian_apply(const Vec& x, const Mat& a) const;

    struct Derivatives {
        Mat jacobian;
        Vec hessian_term;
    };
    Derivatives derivatives(const Vec& x, const Mat& a) const;

    struct Coefficients {
        /// G^{-1}(z), before any nudge off the surface.
        Vec x;
        Vec drift;
        Mat diffusion;
        int iterations = 0;
    };
    /// mu~(z) = J mu(x) + hessian_apply(x, sigma sigma^T), sigma~(z) = J sigma(x), x = G^{-1}(z).
    Coefficients transformed(const Vec& z) const;
    Vec transformed_drift(const Vec& z) const { return transformed(z).drift; }
    Mat transformed_diffusion(const Vec& z) const { return transformed(z).diffusion; }

    /// Finite-difference step of the multi-dimensional derivatives.
    double fd_step() const noexcept { return fd_step_; }

private:
    Vec branch_displacement(const Vec& y, double side) const;
    Derivatives derivatives_impl(const Vec& x, const Mat* a) const;

    SdeProblem problem_;
    std::optional<Hypersurface> surface_;
    AlphaField alpha_;
    double c_ = 0.0;
    double sup_alpha_ = 0.0;
    double fd_step_ = 1e-6;
    bool identity_ = true;
    TransformReport report_;
};

struct TransformOptions {
    AlphaOptions alpha;
    /// Surface points used for sup|alpha| and model checks (multi-d).
    std::size_t surface_samples = 256;
    /// Certification grid: surface points times offsets per side.
    std::size_t certificate_surface_points = 64;
    std::size_t certificate_offsets = 16;
    double certificate_bound = 0.5;
    int max_halvings = 40;
    /// Sampling radius for unbounded surfaces, around the initial value.
    double sample_radius = 2.0;
    std::uint64_t seed = 0x5eed;
};

/// Largest |J(G)(x) - I| (spectral norm) over a grid of points on both sides
/// of the surface within distance c; identity transforms give 0.
double certificate_norm(const Transform& t, std::uint64_t seed, const TransformOptions& options = {});

struct CSelection {
    double c = 0.0;
    double certificate = 0.0;
    int halvings = 0;
};

/// 1D: 0.9 min(1 / (6 max|alpha_k|), reach). Multi-d: start from
/// 0.9 min(reach, 1 / (6 sup|alpha|)) and halve until the certificate is at
/// most 1/2; ConstructionError after max_halvings failures. A bound of
/// infinity on both sides falls back to the unit scale 0.9.
CSelection choose_c(const SdeProblem& problem, const Hypersurface& surface, const AlphaField& alpha,
                    double sup_alpha, const TransformOptions& options = {});

/// Precomputes alpha, sup|alpha| and c for the problem's surface, validates
/// the model assumptions on samples, certifies c. Problems without a surface
/// get the identity.
Transform build_transform(const SdeProblem& problem, const TransformOptions& options = {});

/// Sampling box covering the band of the transform (for diagnostics).
Box band_box(const Transform& t, double radius = 2.0);

/// Numerical lower bound on the Lipschitz constant of G^{-1} near the band.
double estimate_inverse_lipschitz(const Transform& t, std::size_t n_pairs, std::uint64_t seed);

}  // namespace pwsde
