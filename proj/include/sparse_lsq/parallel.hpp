#pragma once

#include <cstddef>
#include <functional>

namespace sparse_lsq {

// Worker count for Monte Carlo loops: SPARSE_LSQ_THREADS if set to a positive
// integer, otherwise std::thread::hardware_concurrency() (at least 1).
unsigned worker_count();

// Calls body(i) for i in [0, count). Iterations are split into contiguous
// blocks, one per worker; body must only write to slot i of its outputs.
// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace sparse_lsq
