#pragma once

#include <cstddef>
#include <functional>

namespace modalign {

/// Worker count from MODAL_ALIGN_THREADS (0 or unset = hardware concurrency).
/// Re-read on every call so tests can vary it within one process.
std::size_t configured_threads();

/// Runs body(i) for i in [0, n), split into contiguous chunks across
/// configured_threads() workers. Each index must write only its own output
/// slot; callers reduce afterwards in index order, so results do not depend
/// on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace modalign
