#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace hjlab {

/// Resolve a thread-count request: 0 means "use the hardware".
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Split [0, n) into contiguous chunks, one per worker, and run `fn(begin, end)`
/// on each. Chunk boundaries depend only on (n, threads), so results stay
/// bit-identical for any thread count as long as chunks write disjoint output.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    int t = resolve_threads(threads);
    if (t <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(t), n);
    std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t w = 0; w < nt; ++w) {
        std::size_t b = w * chunk;
        std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back(fn, b, e);
    }
    for (auto& th : pool) th.join();
}

}  // namespace hjlab
