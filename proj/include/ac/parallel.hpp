#pragma once

#include <cstddef>
#include <functional>

namespace ac {

// Worker count: AC_MINMAX_THREADS when set (clamped to [1, 64]), otherwise the
// hardware concurrency capped at 16.
int thread_budget();

// Run fn(k) for k in [0, n) across the thread budget. fn must be safe to call
// concurrently for distinct k; the first exception thrown by any worker is
// rethrown on the caller after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ac
