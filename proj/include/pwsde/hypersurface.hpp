#pragma once

#include "pwsde/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace pwsde {

/// Finitely many sorted points on the real line.
struct PointSet1D {
    std::vector<double> points;
};

/// {x : a.x = b} with unit a.
struct Hyperplane {
    Vec normal;
    double offset = 0.0;
};

/// {x : |x - center| = radius}.
struct Sphere {
    Vec center;
    double radius = 1.0;
};

/// Nearest point, unit normal there and signed distance, all from one projection.
struct SurfaceFoot {
    Vec point;
    Vec normal;
    double signed_distance = 0.0;
};

/// Extension point for user geometries. Implementations must be of positive
/// reach and return the oriented normal; the Hypersurface wrapper applies
/// orientation flips on top.
class CustomSurface {
public:
    virtual ~CustomSurface() = default;
    virtual int dim() const = 0;
    virtual double reach() const = 0;
    /// Throws DomainError where the nearest point is not unique.
    virtual SurfaceFoot locate(const Vec& x) const = 0;
    virtual double signed_distance(const Vec& x) const = 0;
    virtual int segment_crosses(const Vec& x, const Vec& y) const = 0;
    /// n points spread over the surface (near `anchor` for unbounded surfaces).
    virtual std::vector<Vec> sample(std::size_t n, const Vec& anchor, std::uint64_t seed) const = 0;
    virtual std::string describe() const = 0;
};

/// Exceptional set of a piecewise Lipschitz drift: a hypersurface of positive reach.
///
/// Normal orientation: outward for spheres, +a for hyperplanes, +1 for point
/// sets; `flipped()` reverses it.
class Hypersurface {
public:
    using Shape = std::variant<PointSet1D, Hyperplane, Sphere, std::shared_ptr<const CustomSurface>>;

    static Hypersurface point_set(std::vector<double> points);
    /// a is normalised; b is rescaled accordingly so the set is unchanged.
    static Hypersurface hyperplane(const Vec& a, double b);
    static Hypersurface sphere(const Vec& center, double radius);
    static Hypersurface custom(std::shared_ptr<const CustomSurface> surface);

    int dim() const noexcept { return dim_; }
    double reach() const noexcept { return reach_; }
    double orientation() const noexcept { return orientation_; }
    const Shape& shape() const noexcept { return shape_; }

    Hypersurface flipped() const;

    /// Unique nearest point; DomainError where it is not unique (sphere centre,
    /// midpoint between two points of a point set).
    Vec project(const Vec& x) const { return locate(x).point; }
    SurfaceFoot locate(const Vec& x) const;

    /// Oriented unit normal at xi; xi is projected first when it is more than
    /// 1e-9 away from the surface.
    Vec unit_normal(const Vec& xi) const;

    double signed_distance(const Vec& x) const;
    double distance(const Vec& x) const;
    bool in_band(const Vec& x, double eps) const;

    /// Intersections of the segment [x, y] with the surface; tangential
    /// contacts count once.
    int segment_crosses(const Vec& x, const Vec& y) const;

    /// Validation sample of surface points; hyperplanes are sampled in the
    /// disc of radius `radius` around the projection of `anchor`.
    std::vector<Vec> sample(std::size_t n, const Vec& anchor, std::uint64_t seed, double radius = 2.0) const;

    /// Text form in the config grammar, e.g. `sphere(0,0;1)`.
    std::string describe() const;

private:
    Hypersurface(Shape shape, int dim, double reach) : shape_(std::move(shape)), dim_(dim), reach_(reach) {}

    Shape shape_;
    int dim_;
    double reach_;
    double orientation_ = 1.0;
};

inline constexpr double kSurfaceTolerance = 1e-9;

}  // namespace pwsde
