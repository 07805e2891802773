#include "pwsde/problems.hpp"

#include "pwsde/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pwsde::problems {

SdeProblem circle2d() {
    SdeProblem p;
    p.name = "circle2d";
    p.dim = 2;
    p.drift = [](const Vec& x) {
        Vec mu(2);
        if (x.squaredNorm() > 1.0)
            mu << 1.0, 1.0;
        else
            mu << -x[0], x[1];
        return mu;
    };
    p.diffusion = [](const Vec& x) {
        Mat s = Mat::Zero(2, 2);
        const double scale = 1.0 / (1.0 + x.squaredNorm());
        s(0, 0) = scale * x[0];
        s(1, 0) = scale * x[1];
        return s;
    };
    p.surface = Hypersurface::sphere(Vec::Zero(2), 1.0);
    p.initial = Vec::Constant(2, 0.5);
    p.horizon = 1.0;
    return p;
}

SdeProblem step1d() {
    SdeProblem p;
    p.name = "step1d";
    p.dim = 1;
    p.drift = [](const Vec& x) { return Vec::Constant(1, x[0] > 0.0 ? -1.0 : (x[0] < 0.0 ? 1.0 : -1.0)); };
    p.diffusion = [](const Vec&) { return Mat::Identity(1, 1); };
    p.surface = Hypersurface::point_set({0.0});
    p.initial = Vec::Constant(1, 0.1);
    p.horizon = 1.0;
    return p;
}

SdeProblem gbm1d(double a, double b) {
    SdeProblem p;
    p.name = "gbm1d";
    p.dim = 1;
    p.drift = [a](const Vec& x) { return Vec::Constant(1, a * x[0]); };
    p.diffusion = [b](const Vec& x) { return Mat::Constant(1, 1, b * x[0]); };
    p.initial = Vec::Ones(1);
    p.horizon = 1.0;
    p.exact = [a, b](const Vec& x0, double t, const Vec& w) {
        return Vec::Constant(1, x0[0] * std::exp((a - 0.5 * b * b) * t + b * w[0]));
    };
    return p;
}

std::vector<std::string> names() { return {"circle2d", "gbm1d", "step1d"}; }

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

}  // namespace

SdeProblem lookup(std::string_view name) {
    if (name == "circle2d") return circle2d();
    if (name == "step1d") return step1d();
    if (name == "gbm1d") return gbm1d();

    std::string message = "unknown problem '" + std::string(name) + "'";
    std::vector<std::string> close;
    std::size_t best = std::string::npos;
    for (const auto& n : names()) best = std::min(best, edit_distance(name, n));
    for (const auto& n : names())
        if (edit_distance(name, n) == best) close.push_back(n);
    if (!close.empty()) {
        message += "; did you mean";
        for (std::size_t i = 0; i < close.size(); ++i) message += (i ? ", " : " ") + close[i];
        message += "?";
    }
    message += " (registered:";
    for (const auto& n : names()) message += " " + n;
    message += ")";
    throw ConfigError(message);
}

}  // namespace pwsde::problems
