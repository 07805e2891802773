#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pwsde/errors.hpp"
#include "pwsde/hypersurface.hpp"
#include "pwsde/lipschitz.hpp"
#include "pwsde/problems.hpp"
#include "pwsde/rng.hpp"

#include <cmath>
#include <limits>

using namespace pwsde;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v1(double a) { return Vec::Constant(1, a); }

Box square(double half) { return Box{Vec::Constant(2, -half), Vec::Constant(2, half)}; }

// Random points near the surface, within distance `band` of it.
std::vector<Vec> band_points(const Hypersurface& s, std::size_t n, double band, std::uint64_t seed) {
    const KeyedStream rng(seed);
    const Vec anchor = Vec::Zero(s.dim());
    const auto feet = s.sample(n, anchor, seed);
    std::vector<Vec> out;
    for (std::size_t i = 0; i < feet.size(); ++i) {
        const double off = band * (2.0 * rng.uniform(i) - 1.0);
        out.push_back(feet[i] + off * s.unit_normal(feet[i]));
    }
    return out;
}

}  // namespace

TEST_CASE("project examples") {
    const auto sphere = Hypersurface::sphere(Vec::Zero(2), 1.0);
    CHECK((sphere.project(v2(2, 0)) - v2(1, 0)).norm() < 1e-15);
    CHECK_THROWS_AS(sphere.project(v2(0, 0)), DomainError);

    const auto plane = Hypersurface::hyperplane(v2(1, 0), 0.0);
    CHECK((plane.project(v2(3, 4)) - v2(0, 4)).norm() < 1e-15);

    const auto points = Hypersurface::point_set({-1.0, 2.0});
    CHECK(points.project(v1(0.2))[0] == -1.0);
    CHECK_THROWS_AS(points.project(v1(0.5)), DomainError);
    CHECK_THROWS_AS(Hypersurface::point_set({1.0, 0.0}), ArgumentError);
}

TEST_CASE("unit_normal examples") {
    CHECK((Hypersurface::sphere(Vec::Zero(2), 1.0).unit_normal(v2(0, 1)) - v2(0, 1)).norm() < 1e-15);
    CHECK((Hypersurface::hyperplane(v2(0, 1), 3.0).unit_normal(v2(5, 3)) - v2(0, 1)).norm() < 1e-15);
    CHECK(Hypersurface::point_set({0.0}).unit_normal(v1(0))[0] == 1.0);
    CHECK(Hypersurface::point_set({0.0}).flipped().unit_normal(v1(0))[0] == -1.0);
}

TEST_CASE("signed_distance and in_band examples") {
    const auto sphere = Hypersurface::sphere(Vec::Zero(2), 1.0);
    CHECK(sphere.signed_distance(v2(2, 0)) == doctest::Approx(1.0));
    CHECK(sphere.signed_distance(v2(0.5, 0)) == doctest::Approx(-0.5));
    CHECK(Hypersurface::hyperplane(v2(1, 0), 0.0).signed_distance(v2(-3, 7)) == doctest::Approx(-3.0));
    CHECK(sphere.flipped().signed_distance(v2(2, 0)) == doctest::Approx(-1.0));

    CHECK(sphere.in_band(v2(1.05, 0), 0.1));
    CHECK_FALSE(sphere.in_band(v2(1.05, 0), 0.01));
    const auto origin = Hypersurface::point_set({0.0});
    for (double eps : {1e-12, 1e-3, 1.0}) CHECK(origin.in_band(v1(0), eps));
}

TEST_CASE("hyperplane normalisation keeps the set") {
    const auto plane = Hypersurface::hyperplane(v2(3, 4), 10.0);
    CHECK(plane.signed_distance(v2(1.2, 1.6)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(plane.unit_normal(v2(1.2, 1.6)).isApprox(v2(0.6, 0.8)));
    CHECK(std::isinf(plane.reach()));
}

TEST_CASE("reach of the built-in shapes") {
    CHECK(Hypersurface::sphere(Vec::Zero(3), 2.5).reach() == 2.5);
    CHECK(Hypersurface::point_set({-1.0, 0.0, 3.0}).reach() == 0.5);
    CHECK(std::isinf(Hypersurface::point_set({0.0}).reach()));
}

TEST_CASE("segment_crosses examples") {
    const auto sphere = Hypersurface::sphere(Vec::Zero(2), 1.0);
    CHECK(sphere.segment_crosses(v2(2, 0), v2(3, 0)) == 0);
    CHECK(sphere.segment_crosses(v2(-2, 0), v2(2, 0)) == 2);
    CHECK(sphere.segment_crosses(v2(-1, 1), v2(1, 1)) == 1);  // tangent
    CHECK(sphere.segment_crosses(v2(0, 0), v2(0.5, 0.1)) == 0);
    CHECK(Hypersurface::hyperplane(v2(1, 0), 0.0).segment_crosses(v2(-1, 0), v2(1, 5)) == 1);
    CHECK(Hypersurface::point_set({0.0, 1.0, 2.0}).segment_crosses(v1(-0.5), v1(1.5)) == 2);
}

TEST_CASE("segment_crosses on the sphere matches a dense sign-change count") {
    const auto sphere = Hypersurface::sphere(Vec::Zero(2), 1.0);
    const KeyedStream rng(99);
    int checked = 0;
    for (std::uint64_t i = 0; i < 400; ++i) {
        const Vec x = v2(4 * rng.uniform(4 * i) - 2, 4 * rng.uniform(4 * i + 1) - 2);
        const Vec y = v2(4 * rng.uniform(4 * i + 2) - 2, 4 * rng.uniform(4 * i + 3) - 2);
        // Skip near-tangent segments, where a sign count cannot resolve the contact.
        const Vec d = y - x;
        const double t = std::clamp(-x.dot(d) / d.squaredNorm(), 0.0, 1.0);
        if (std::abs((x + t * d).norm() - 1.0) < 1e-3) continue;
        int changes = 0;
        double prev = x.squaredNorm() - 1.0;
        for (int k = 1; k <= 20000; ++k) {
            const double cur = (x + (k / 20000.0) * d).squaredNorm() - 1.0;
            if ((prev < 0) != (cur < 0)) ++changes;
            prev = cur;
        }
        CHECK(sphere.segment_crosses(x, y) == changes);
        ++checked;
    }
    CHECK(checked > 300);
}

TEST_CASE("lipschitz_quotient_estimate examples") {
    const auto sphere = Hypersurface::sphere(Vec::Zero(2), 1.0);
    const auto constant = [](const Vec&) { return v2(3, -1); };
    CHECK(lipschitz_quotient_estimate(constant, sphere, square(2), 2000, 1) == 0.0);

    const auto identity = [](const Vec& x) { return x; };
    CHECK(lipschitz_quotient_estimate(identity, sphere, square(2), 2000, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lipschitz_quotient_estimate(identity, sphere, square(2), 2000, 1, PairPolicy::any) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lipschitz estimate of the circle drift against a dense-grid oracle") {
    const SdeProblem p = problems::circle2d();
    const double est = lipschitz_quotient_estimate(p.drift, *p.surface, square(2), 20000, 3);

    // Oracle: quotients between neighbouring points of a 401x401 grid whose
    // segment stays on one side of the circle.
    double oracle = 0.0;
    const int n = 400;
    const double h = 4.0 / n;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            const Vec x = v2(-2 + i * h, -2 + j * h);
            for (const Vec& d : {v2(h, 0), v2(0, h), v2(h, h), v2(h, -h)}) {
                const Vec y = x + d;
                if (p.surface->segment_crosses(x, y) > 0) continue;
                oracle = std::max(oracle, (p.drift(x) - p.drift(y)).norm() / d.norm());
            }
        }
    CHECK(oracle == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::isfinite(est));
    CHECK(est >= 1.0 - 1e-9);
    CHECK(est <= oracle + 1e-9);

    // Pairs across the jump make the plain Euclidean quotient blow up.
    CHECK(lipschitz_quotient_estimate(p.drift, *p.surface, square(2), 20000, 3, PairPolicy::any) > 10.0);
}

TEST_CASE("lipschitz estimate reports impossible sampling") {
    const auto f = [](const Vec& x) { return x; };
    const auto origin = Hypersurface::point_set({0.0});
    CHECK_NOTHROW(lipschitz_quotient_estimate(f, origin, Box{v1(-1), v1(1)}, 100, 1));
    // A single-point box never yields a pair at positive distance.
    CHECK_THROWS_AS(lipschitz_quotient_estimate(f, origin, Box{v1(0.5), v1(0.5)}, 10, 1), SamplingError);
    // Every segment in this box touches the point set.
    CHECK_THROWS_AS(lipschitz_quotient_estimate(f, origin, Box{v1(0), v1(0)}, 10, 1), SamplingError);
}

TEST_CASE("projection invariants within the band") {
    const std::vector<Hypersurface> surfaces = {
        Hypersurface::sphere(Vec::Zero(2), 1.0),
        Hypersurface::sphere((Vec(3) << 1, -2, 0.5).finished(), 0.7),
        Hypersurface::hyperplane((Vec(3) << 1, 2, -2).finished(), 0.3),
        Hypersurface::point_set({-1.0, 0.5, 2.0}),
    };
    for (const auto& s : surfaces) {
        CAPTURE(s.describe());
        const double band = std::min(0.9 * s.reach(), 1.0);
        for (const Vec& x : band_points(s, 500, band, 17)) {
            const SurfaceFoot f = s.locate(x);
            // idempotence
            CHECK((s.project(f.point) - f.point).norm() <= 1e-12);
            // Pythagoras
            CHECK(std::abs((x - f.point).norm() - std::abs(s.signed_distance(x))) <= 1e-12);
            // normal consistency: x - p(x) has no component orthogonal to n
            const Vec n = s.unit_normal(f.point);
            const Vec r = x - f.point;
            CHECK((r - r.dot(n) * n).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(r.dot(n) == doctest::Approx(f.signed_distance).epsilon(1e-12));
        }
    }
}

TEST_CASE("sphere projection is continuous on a grid") {
    const auto s = Hypersurface::sphere(v2(0.3, -0.2), 1.0);
    const int n = 200;
    const double h = 4.0 / n;
    int worst_ok = 0, checked = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec x = v2(0.3 - 2 + i * h, -0.2 - 2 + j * h);
            const Vec y = x + v2(h, 0);
            const double rx = (x - v2(0.3, -0.2)).norm(), ry = (y - v2(0.3, -0.2)).norm();
            // Near the centre the projection is continuous but steep (slope 1/r),
            // so only radii where a 10x spacing bound is meaningful are used.
            if (rx < 0.15 || ry < 0.15 || rx >= 2 || ry >= 2) continue;
            ++checked;
            if ((s.project(x) - s.project(y)).norm() <= 10 * h) ++worst_ok;
        }
    CHECK(checked > 20000);
    CHECK(worst_ok == checked);
}

TEST_CASE("sample returns points on the surface") {
    const auto sphere = Hypersurface::sphere((Vec(3) << 0, 0, 1).finished(), 2.0);
    for (const Vec& p : sphere.sample(100, Vec::Zero(3), 4)) CHECK(std::abs(sphere.signed_distance(p)) < 1e-12);
    const auto plane = Hypersurface::hyperplane(v2(1, 1), 1.0);
    for (const Vec& p : plane.sample(50, v2(5, 5), 4, 1.0)) {
        CHECK(std::abs(plane.signed_distance(p)) < 1e-12);
        CHECK((p - plane.project(v2(5, 5))).norm() <= 1.0 + 1e-12);
    }
    CHECK(Hypersurface::point_set({0.0, 1.0}).sample(10, v1(0), 1).size() == 2);
}

TEST_CASE("custom surfaces plug into the wrapper") {
    struct Unit1D : CustomSurface {
        int dim() const override { return 1; }
        double reach() const override { return std::numeric_limits<double>::infinity(); }
        SurfaceFoot locate(const Vec& x) const override { return {v1(0.25), v1(1.0), x[0] - 0.25}; }
        double signed_distance(const Vec& x) const override { return x[0] - 0.25; }
        int segment_crosses(const Vec& x, const Vec& y) const override {
            return (x[0] - 0.25) * (y[0] - 0.25) <= 0 ? 1 : 0;
        }
        std::vector<Vec> sample(std::size_t, const Vec&, std::uint64_t) const override { return {v1(0.25)}; }
        std::string describe() const override { return "custom(0.25)"; }
    };
    const auto s = Hypersurface::custom(std::make_shared<Unit1D>());
    CHECK(s.project(v1(3))[0] == 0.25);
    CHECK(s.flipped().signed_distance(v1(1)) == doctest::Approx(-0.75));
    CHECK(s.flipped().unit_normal(v1(0.25))[0] == -1.0);
    CHECK(s.segment_crosses(v1(0), v1(1)) == 1);
}

TEST_CASE("describe uses the config grammar") {
    CHECK(Hypersurface::sphere(Vec::Zero(2), 1.0).describe() == "sphere(0,0;1)");
    CHECK(Hypersurface::point_set({0.0, 1.5}).describe() == "pointset1d(0,1.5)");
}
