#pragma once

#include <cstddef>
#include <functional>

namespace ov {

// Worker count: OVOXEL_THREADS caps it, 0 or unset means hardware concurrency.
// Re-read on every call so tests can toggle the variable at runtime.
int thread_count();

// Static partition of [0, n) into one contiguous chunk per worker. Each chunk
// writes only to its own output slots, so results never depend on the number
// of threads or on scheduling.
void parallel_for(size_t n, const std::function<void(size_t begin, size_t end)>& body);

}  // namespace ov
