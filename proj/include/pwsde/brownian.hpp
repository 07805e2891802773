#pragma once

#include "pwsde/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pwsde {

/// Finest-level Brownian increments of one path on [0, T].
///
/// The 2^levels increments are N(0, T 2^-levels I) draws rounded to a fixed
/// dyadic lattice (spacing `lattice()`), which makes every partial sum exact in
/// double precision. Coarse increments obtained by summation therefore agree
/// bit-for-bit regardless of the order of summation, and paths at different
/// step counts are driven by exactly the same Brownian path.
class BrownianGrid {
public:
    BrownianGrid(std::uint64_t seed, int dim, double horizon, int levels,
                 std::vector<double> increments, double lattice);

    std::uint64_t seed() const noexcept { return seed_; }
    int dim() const noexcept { return dim_; }
    double horizon() const noexcept { return horizon_; }
    int levels() const noexcept { return levels_; }
    double lattice() const noexcept { return lattice_; }

    std::size_t finest_steps() const noexcept { return std::size_t{1} << levels_; }
    double finest_step() const noexcept { return horizon_ / static_cast<double>(finest_steps()); }

    /// Finest increment j as a view of `dim` doubles.
    std::span<const double> finest(std::size_t j) const noexcept {
        return {increments_.data() + j * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }

    std::span<const double> raw() const noexcept { return increments_; }

    /// Validates step_count and returns the number of finest increments per coarse step.
    std::size_t block_size(std::size_t step_count) const;

    /// Increment over coarse step j when [0, T] is split into step_count steps.
    Vec coarse(std::size_t step_count, std::size_t j) const;

    /// Sum of finest increments over [first, last).
    Vec sum(std::size_t first, std::size_t last) const;

private:
    std::uint64_t seed_;
    int dim_;
    double horizon_;
    int levels_;
    double lattice_;
    std::vector<double> increments_;
};

/// Draws the grid deterministically from (seed, dim, horizon, levels).
BrownianGrid sample_brownian(std::uint64_t seed, int dim, double horizon, int levels);

/// step_count increments, each the exact sum of 2^levels / step_count finest ones.
std::vector<Vec> increments_at(const BrownianGrid& grid, std::size_t step_count);

/// Largest supported level count (2^24 finest steps).
inline constexpr int kMaxLevels = 24;

}  // namespace pwsde
