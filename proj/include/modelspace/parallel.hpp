#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace modelspace {

namespace detail {
inline std::atomic<unsigned>& workerLimitStorage() {
    static std::atomic<unsigned> limit{0};
    return limit;
}
}  // namespace detail

/// Caps the number of worker threads used by data-parallel loops (0 = hardware).
inline void setWorkerLimit(unsigned workers) { detail::workerLimitStorage().store(workers); }

inline unsigned workerCount() {
    unsigned limit = detail::workerLimitStorage().load();
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return limit == 0 ? hw : std::min(limit, hw);
}

/// Runs fn(i) for i in [0, n). Each index must write only its own output slot;
/// callers reduce afterwards in index order, so results do not depend on the
/// thread count.
template <class Fn>
void parallelFor(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(workerCount(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failureLock;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> guard(failureLock);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Pairwise summation in a fixed order.
inline double pairwiseSum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwiseSum(values.first(half)) + pairwiseSum(values.subspan(half));
}

}  // namespace modelspace
