#pragma once

#include <cstddef>
#include <functional>

namespace pwsde {

/// Worker count from PWSDE_THREADS, else the hardware concurrency (>= 1).
unsigned default_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0: default).
/// The first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace pwsde
