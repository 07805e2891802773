#pragma once

#include "pwsde/hypersurface.hpp"
#include "pwsde/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>

namespace pwsde {

/// Axis-aligned sampling region.
struct Box {
    Vec lower;
    Vec upper;
};

enum class PairPolicy {
    /// Only pairs whose segment misses the surface, so the Euclidean distance
    /// equals the intrinsic distance in the complement of the surface.
    avoid_surface,
    /// Every pair; plain Euclidean Lipschitz quotient.
    any,
};

/// Largest |f(x) - f(y)| / |x - y| over n_pairs sampled pairs in `region`.
///
/// Pairs mix global draws with close pairs at log-uniform separations, so
/// both large-scale and local slopes are probed. A lower bound on the
/// (piecewise) Lipschitz constant. SamplingError if no admissible pair turns
/// up within 100 * n_pairs draws.
double lipschitz_quotient_estimate(const std::function<Vec(const Vec&)>& f, const Hypersurface& surface,
                                   const Box& region, std::size_t n_pairs, std::uint64_t seed,
                                   PairPolicy policy = PairPolicy::avoid_surface);

}  // namespace pwsde
