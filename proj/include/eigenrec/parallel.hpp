#pragma once

#include <cstddef>
#include <functional>

namespace eigenrec {

/// Worker count: EIGENREC_THREADS if set (>= 1), else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) over contiguous static chunks. Callers write
/// results by index, so output never depends on scheduling. The first
/// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace eigenrec
