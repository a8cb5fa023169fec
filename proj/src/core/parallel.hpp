#pragma once

#include <cstddef>
#include <functional>

namespace mvc {

/// Worker cap from the GCFAGG_THREADS environment variable (>= 1).
/// Unset or invalid means 1 (fully sequential).
std::size_t max_threads();

/// Run fn(begin, end) over [0, n) split into contiguous row blocks, one per
/// worker. Each index is processed by exactly one worker, so any computation
/// whose per-index work is order-independent across indices stays bit-exact
/// regardless of the thread count.
void parallel_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace mvc
