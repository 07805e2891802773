#include "pwsde/brownian.hpp"

#include "pwsde/errors.hpp"
#include "pwsde/rng.hpp"

#include <cmath>
#include <string>

namespace pwsde {

namespace {

// 2^-40 for horizons up to 1; widened with sqrt(T) so that |W| stays far
// below 2^53 lattice units.
double lattice_for(double horizon) {
    const int widen = horizon > 1.0 ? static_cast<int>(std::ceil(std::log2(std::sqrt(horizon)))) : 0;
    return std::ldexp(1.0, -40 + widen);
}

}  // namespace

BrownianGrid::BrownianGrid(std::uint64_t seed, int dim, double horizon, int levels,
                           std::vector<double> increments, double lattice)
    : seed_(seed), dim_(dim), horizon_(horizon), levels_(levels), lattice_(lattice),
      increments_(std::move(increments)) {
    if (increments_.size() != finest_steps() * static_cast<std::size_t>(dim_))
        throw ArgumentError("BrownianGrid: increment array has the wrong size");
}

std::size_t BrownianGrid::block_size(std::size_t step_count) const {
    const std::size_t n = finest_steps();
    if (step_count == 0 || step_count > n || n % step_count != 0)
        throw ArgumentError("step count " + std::to_string(step_count) + " does not divide 2^" +
                            std::to_string(levels_));
    return n / step_count;
}

Vec BrownianGrid::sum(std::size_t first, std::size_t last) const {
    Vec s = Vec::Zero(dim_);
    for (std::size_t j = first; j < last; ++j) {
        const double* w = increments_.data() + j * static_cast<std::size_t>(dim_);
        for (int k = 0; k < dim_; ++k) s[k] += w[k];
    }
    return s;
}

Vec BrownianGrid::coarse(std::size_t step_count, std::size_t j) const {
    const std::size_t block = block_size(step_count);
    return sum(j * block, (j + 1) * block);
}

BrownianGrid sample_brownian(std::uint64_t seed, int dim, double horizon, int levels) {
    if (dim < 1 || dim > kMaxDim)
        throw ArgumentError("sample_brownian: dim must lie in [1, " + std::to_string(kMaxDim) + "]");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ArgumentError("sample_brownian: horizon must be positive");
    if (levels < 0 || levels > kMaxLevels)
        throw ArgumentError("sample_brownian: levels must lie in [0, " + std::to_string(kMaxLevels) + "]");

    const std::size_t n = (std::size_t{1} << levels) * static_cast<std::size_t>(dim);
    const double scale = std::sqrt(std::ldexp(horizon, -levels));
    const double lattice = lattice_for(horizon);
    const KeyedStream stream(seed);

    std::vector<double> increments(n);
    for (std::size_t i = 0; i < n; ++i)
        increments[i] = std::nearbyint(scale * stream.normal(i) / lattice) * lattice;
    return BrownianGrid(seed, dim, horizon, levels, std::move(increments), lattice);
}

std::vector<Vec> increments_at(const BrownianGrid& grid, std::size_t step_count) {
    const std::size_t block = grid.block_size(step_count);
    std::vector<Vec> out;
    out.reserve(step_count);
    for (std::size_t j = 0; j < step_count; ++j) out.push_back(grid.sum(j * block, (j + 1) * block));
    return out;
}

}  // namespace pwsde
