#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace seglab {

// Runs fn(i) for i in [0, n). Work items must be independent; results must be
// written to per-index slots so the outcome does not depend on scheduling.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn, unsigned threads = 0) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w]() {
            for (size_t i = w; i < n; i += threads) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace seglab
