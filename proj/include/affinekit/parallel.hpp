#pragma once

// Minimal fork-join helper. Work items are independent and write to their
// own slots, so results do not depend on the thread count. AFFINEKIT_THREADS
// caps the number of threads (default: hardware concurrency).

#include <cstddef>
#include <functional>

namespace affinekit {

/// Thread budget from AFFINEKIT_THREADS, at least 1.
unsigned thread_budget();

/// Calls fn(i) for i in [0, count). Exceptions from workers are rethrown
/// (the one with the smallest index wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace affinekit
