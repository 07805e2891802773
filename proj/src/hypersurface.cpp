#include "pwsde/hypersurface.hpp"

#include "pwsde/errors.hpp"
#include "pwsde/format.hpp"
#include "pwsde/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pwsde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join(const Vec& v) {
    std::string s;
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    return s;
}

// Index of the nearest point and whether the nearest point is tied.
std::pair<std::size_t, bool> nearest(const std::vector<double>& pts, double x) {
    const auto it = std::lower_bound(pts.begin(), pts.end(), x);
    if (it == pts.begin()) return {0, false};
    if (it == pts.end()) return {pts.size() - 1, false};
    const std::size_t hi = static_cast<std::size_t>(it - pts.begin());
    const double dl = x - pts[hi - 1];
    const double dh = pts[hi] - x;
    if (dh < dl) return {hi, false};
    return {hi - 1, dl == dh && dl > 0.0};
}

// Orthonormal basis of the orthogonal complement of unit vector a.
Mat tangent_basis(const Vec& a) {
    const int d = static_cast<int>(a.size());
    Mat full = Mat::Identity(d, d);
    full.col(0) = a;
    Eigen::HouseholderQR<Mat> qr(full);
    Mat q = qr.householderQ();
    return q.rightCols(d - 1);
}

}  // namespace

Hypersurface Hypersurface::point_set(std::vector<double> points) {
    if (points.empty()) throw ArgumentError("pointset1d: at least one point required");
    for (double p : points)
        if (!std::isfinite(p)) throw ArgumentError("pointset1d: points must be finite");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i] > points[i - 1])) throw ArgumentError("pointset1d: points must be strictly increasing");
    double reach = kInf;
    for (std::size_t i = 1; i < points.size(); ++i) reach = std::min(reach, 0.5 * (points[i] - points[i - 1]));
    return Hypersurface(PointSet1D{std::move(points)}, 1, reach);
}

Hypersurface Hypersurface::hyperplane(const Vec& a, double b) {
    const double norm = a.norm();
    if (a.size() < 1 || a.size() > kMaxDim) throw ArgumentError("hyperplane: bad dimension");
    if (!(norm > 0.0) || !std::isfinite(norm) || !std::isfinite(b))
        throw ArgumentError("hyperplane: normal must be finite and non-zero");
    return Hypersurface(Hyperplane{a / norm, b / norm}, static_cast<int>(a.size()), kInf);
}

Hypersurface Hypersurface::sphere(const Vec& center, double radius) {
    if (center.size() < 1 || center.size() > kMaxDim) throw ArgumentError("sphere: bad dimension");
    if (!(radius > 0.0) || !std::isfinite(radius) || !all_finite(center))
        throw ArgumentError("sphere: radius must be positive and the centre finite");
    return Hypersurface(Sphere{center, radius}, static_cast<int>(center.size()), radius);
}

Hypersurface Hypersurface::custom(std::shared_ptr<const CustomSurface> surface) {
    if (!surface) throw ArgumentError("custom surface: null");
    const int d = surface->dim();
    const double reach = surface->reach();
    if (!(reach > 0.0)) throw ArgumentError("custom surface: reach must be positive");
    return Hypersurface(std::move(surface), d, reach);
}

Hypersurface Hypersurface::flipped() const {
    Hypersurface h = *this;
    h.orientation_ = -orientation_;
    return h;
}

SurfaceFoot Hypersurface::locate(const Vec& x) const {
    SurfaceFoot foot = std::visit(
        Overloaded{
            [&](const PointSet1D& s) {
                const auto [k, tied] = nearest(s.points, x[0]);
                if (tied) throw DomainError("projection onto point set is not unique at " + format_double(x[0]));
                SurfaceFoot f;
                f.point = Vec::Constant(1, s.points[k]);
                f.normal = Vec::Ones(1);
                f.signed_distance = x[0] - s.points[k];
                return f;
            },
            [&](const Hyperplane& s) {
                SurfaceFoot f;
                f.signed_distance = s.normal.dot(x) - s.offset;
                f.point = x - f.signed_distance * s.normal;
                f.normal = s.normal;
                return f;
            },
            [&](const Sphere& s) {
                const Vec v = x - s.center;
                const double r = v.norm();
                if (!(r > 0.0)) throw DomainError("projection onto sphere is not unique at its centre");
                SurfaceFoot f;
                f.normal = v / r;
                f.point = s.center + s.radius * f.normal;
                f.signed_distance = r - s.radius;
                return f;
            },
            [&](const std::shared_ptr<const CustomSurface>& s) { return s->locate(x); },
        },
        shape_);
    if (orientation_ < 0.0) {
        foot.normal = -foot.normal;
        foot.signed_distance = -foot.signed_distance;
    }
    return foot;
}

Vec Hypersurface::unit_normal(const Vec& xi) const { return locate(xi).normal; }

double Hypersurface::signed_distance(const Vec& x) const {
    const double sd = std::visit(
        Overloaded{
            [&](const PointSet1D& s) { return x[0] - s.points[nearest(s.points, x[0]).first]; },
            [&](const Hyperplane& s) { return s.normal.dot(x) - s.offset; },
            [&](const Sphere& s) { return (x - s.center).norm() - s.radius; },
            [&](const std::shared_ptr<const CustomSurface>& s) { return s->signed_distance(x); },
        },
        shape_);
    return orientation_ * sd;
}

double Hypersurface::distance(const Vec& x) const { return std::abs(signed_distance(x)); }

bool Hypersurface::in_band(const Vec& x, double eps) const { return distance(x) < eps; }

int Hypersurface::segment_crosses(const Vec& x, const Vec& y) const {
    return std::visit(
        Overloaded{
            [&](const PointSet1D& s) {
                const double lo = std::min(x[0], y[0]) - kSurfaceTolerance;
                const double hi = std::max(x[0], y[0]) + kSurfaceTolerance;
                const auto first = std::lower_bound(s.points.begin(), s.points.end(), lo);
                const auto last = std::upper_bound(s.points.begin(), s.points.end(), hi);
                return static_cast<int>(last - first);
            },
            [&](const Hyperplane& s) {
                const double f0 = s.normal.dot(x) - s.offset;
                const double f1 = s.normal.dot(y) - s.offset;
                const double tol = kSurfaceTolerance;
                return (f0 <= tol && f1 >= -tol) || (f0 >= -tol && f1 <= tol) ? 1 : 0;
            },
            [&](const Sphere& s) {
                const Vec d = y - x;
                const Vec v = x - s.center;
                const double a = d.squaredNorm();
                const double c = v.squaredNorm() - s.radius * s.radius;
                if (a == 0.0) return c == 0.0 ? 1 : 0;
                const double b = 2.0 * v.dot(d);
                const double disc = b * b - 4.0 * a * c;
                if (disc < 0.0) return 0;
                // Roots within the surface tolerance of an endpoint still count.
                const double slack = kSurfaceTolerance / std::sqrt(a);
                const auto inside = [slack](double t) { return t >= -slack && t <= 1.0 + slack ? 1 : 0; };
                if (disc == 0.0) return inside(-b / (2.0 * a));
                const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
                const double t1 = q / a;
                const double t2 = c / q;
                return inside(t1) + inside(t2);
            },
            [&](const std::shared_ptr<const CustomSurface>& s) { return s->segment_crosses(x, y); },
        },
        shape_);
}

std::vector<Vec> Hypersurface::sample(std::size_t n, const Vec& anchor, std::uint64_t seed, double radius) const {
    const KeyedStream stream(seed);
    return std::visit(
        Overloaded{
            [&](const PointSet1D& s) {
                std::vector<Vec> out;
                for (double p : s.points) out.push_back(Vec::Constant(1, p));
                return out;
            },
            [&](const Hyperplane& s) {
                std::vector<Vec> out;
                const Vec base = anchor - (s.normal.dot(anchor) - s.offset) * s.normal;
                if (dim_ == 1) return std::vector<Vec>{base};
                const Mat basis = tangent_basis(s.normal);
                const double shift = stream.uniform(0);
                for (std::size_t i = 0; i < n; ++i) {
                    Vec coords(dim_ - 1);
                    if (dim_ == 2) {
                        coords[0] = radius * (2.0 * (static_cast<double>(i) + shift) / static_cast<double>(n) - 1.0);
                    } else {
                        for (int k = 0; k < dim_ - 1; ++k)
                            coords[k] = radius * (2.0 * stream.uniform(1 + i * kMaxDim + k) - 1.0);
                    }
                    out.push_back(base + basis * coords);
                }
                return out;
            },
            [&](const Sphere& s) {
                std::vector<Vec> out;
                if (dim_ == 1) {
                    out.push_back(Vec::Constant(1, s.center[0] - s.radius));
                    out.push_back(Vec::Constant(1, s.center[0] + s.radius));
                    return out;
                }
                const double shift = stream.uniform(0);
                for (std::size_t i = 0; i < n; ++i) {
                    Vec dir(dim_);
                    if (dim_ == 2) {
                        const double theta = 2.0 * std::numbers::pi * (static_cast<double>(i) + shift) / static_cast<double>(n);
                        dir << std::cos(theta), std::sin(theta);
                    } else {
                        do {
                            for (int k = 0; k < dim_; ++k) dir[k] = stream.normal(1 + i * kMaxDim + k);
                        } while (dir.norm() == 0.0);
                        dir.normalize();
                    }
                    out.push_back(s.center + s.radius * dir);
                }
                return out;
            },
            [&](const std::shared_ptr<const CustomSurface>& s) { return s->sample(n, anchor, seed); },
        },
        shape_);
}

std::string Hypersurface::describe() const {
    return std::visit(
        Overloaded{
            [](const PointSet1D& s) {
                std::string out = "pointset1d(";
                for (std::size_t i = 0; i < s.points.size(); ++i) {
                    if (i) out += ',';
                    out += format_double(s.points[i]);
                }
                return out + ")";
            },
            [](const Hyperplane& s) { return "hyperplane(" + join(s.normal) + ";" + format_double(s.offset) + ")"; },
            [](const Sphere& s) { return "sphere(" + join(s.center) + ";" + format_double(s.radius) + ")"; },
            [](const std::shared_ptr<const CustomSurface>& s) { return s->describe(); },
        },
        shape_);
}

}  // namespace pwsde
