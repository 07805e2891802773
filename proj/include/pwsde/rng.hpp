#pragma once

#include <cstdint>

namespace pwsde {

/// SplitMix64 finaliser; a bijective avalanche mix of one 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream key from a parent key and an index, e.g.
/// (master_seed, path_index) -> per-path seed.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(parent ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: the value at `counter` depends only on (key, counter).
class KeyedStream {
public:
    constexpr explicit KeyedStream(std::uint64_t key) noexcept : key_(mix64(key)) {}

    constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
        return mix64(key_ ^ mix64(counter));
    }

    /// Uniform in the open interval (0, 1), 53-bit resolution.
    constexpr double uniform(std::uint64_t counter) const noexcept {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by inversion of the uniform at the same counter.
    double normal(std::uint64_t counter) const;

    constexpr std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
};

/// Standard normal quantile function.
double normal_quantile(double u);

}  // namespace pwsde
