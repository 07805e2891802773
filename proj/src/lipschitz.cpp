#include "pwsde/lipschitz.hpp"

#include "pwsde/errors.hpp"
#include "pwsde/rng.hpp"

#include <algorithm>
#include <cmath>

namespace pwsde {

double lipschitz_quotient_estimate(const std::function<Vec(const Vec&)>& f, const Hypersurface& surface,
                                   const Box& region, std::size_t n_pairs, std::uint64_t seed, PairPolicy policy) {
    if (n_pairs < 1) throw ArgumentError("lipschitz_quotient_estimate: n_pairs must be >= 1");
    const int d = static_cast<int>(region.lower.size());
    if (d != surface.dim() || region.upper.size() != d)
        throw ArgumentError("lipschitz_quotient_estimate: region dimension mismatch");
    const Vec span = region.upper - region.lower;
    const double diameter = span.norm();

    const KeyedStream stream(seed);
    std::uint64_t counter = 0;
    const auto point = [&] {
        Vec x(d);
        for (int k = 0; k < d; ++k) x[k] = region.lower[k] + span[k] * stream.uniform(counter++);
        return x;
    };

    double best = 0.0;
    std::size_t accepted = 0;
    const std::size_t max_attempts = 100 * n_pairs;
    for (std::size_t attempt = 0; attempt < max_attempts && accepted < n_pairs; ++attempt) {
        const Vec x = point();
        Vec y(d);
        if (attempt % 2 == 0) {
            y = point();
        } else {
            Vec dir(d);
            for (int k = 0; k < d; ++k) dir[k] = stream.normal(counter++);
            if (dir.norm() == 0.0) continue;
            const double r = diameter * std::pow(10.0, -4.0 * stream.uniform(counter++));
            y = (x + r * dir.normalized()).cwiseMax(region.lower).cwiseMin(region.upper);
        }
        const double dist = (x - y).norm();
        if (!(dist > 0.0)) continue;
        if (policy == PairPolicy::avoid_surface && surface.segment_crosses(x, y) != 0) continue;
        ++accepted;
        best = std::max(best, (f(x) - f(y)).norm() / dist);
    }
    if (accepted == 0) throw SamplingError("lipschitz_quotient_estimate: no admissible pair found");
    return best;
}

}  // namespace pwsde
