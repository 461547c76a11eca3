#pragma once

#include <cstddef>
#include <functional>

namespace cellflow {

/// Worker count: hardware concurrency, capped by CELLFLOW_THREADS when set.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) over contiguous blocks. Callers must only write
/// to index-owned outputs; any reduction happens afterwards in index order.
void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& fn);

}  // namespace cellflow
