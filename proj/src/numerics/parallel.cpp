#include "cellflow/numerics/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace cellflow {

std::size_t worker_count() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CELLFLOW_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
        } catch (...) {
        }
    }
    return n;
}

void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& fn) {
    if (n <= 0) return;
    const std::size_t workers = std::min<std::size_t>(worker_count(), static_cast<std::size_t>(n));
    if (workers <= 1 || n < 64) {
        for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::ptrdiff_t chunk = (n + static_cast<std::ptrdiff_t>(workers) - 1) / static_cast<std::ptrdiff_t>(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(w) * chunk;
        const std::ptrdiff_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::ptrdiff_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace cellflow
