#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace breakscan {

// Worker count: explicit request > BREAKSCAN_THREADS env > hardware.
int resolve_threads(int requested = 0);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must
// be independent; outputs should be written to per-index slots so results
// do not depend on scheduling order. The first exception thrown by any
// item is rethrown on the caller thread after all workers join.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn);

}  // namespace breakscan
