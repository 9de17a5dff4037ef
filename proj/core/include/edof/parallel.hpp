#pragma once

#include <cstddef>
#include <functional>

namespace edof {

/// Worker count: EDOF_THREADS if set and positive, otherwise hardware concurrency.
int thread_count();

/// Splits [0, n) into contiguous chunks and runs `body(begin, end)` on each.
/// Chunks write disjoint outputs, so results never depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace edof
