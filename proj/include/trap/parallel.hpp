#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace trap {

/// Thread cap from TRAP_THREADS (0 or unset = auto).
inline int thread_limit() {
    const char* env = std::getenv("TRAP_THREADS");
    long v = env ? std::atol(env) : 0;
    if (v <= 0) v = static_cast<long>(std::thread::hardware_concurrency());
    return v > 0 ? static_cast<int>(v) : 1;
}

/// Runs fn(i) for i in [0, n). Work items must be independent; results
/// may not depend on the schedule.
inline void parallel_for(long n, const std::function<void(long)>& fn) {
    const int threads = std::min<long>(thread_limit(), n);
    if (threads <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (long i = t; i < n; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace trap
