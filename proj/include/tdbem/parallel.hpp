#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace tdbem {

// Runs body(i) for i in [0, n) on up to `threads` workers; items are claimed dynamically.
template <class F>
void parallelFor(int n, int threads, F&& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) body(i);
        });
}

}  // namespace tdbem
