#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace alm::detail {

// Splits [0, n) into contiguous chunks, one per worker. threads == 0 uses
// the hardware concurrency.
inline void run_workers(std::size_t n, unsigned threads,
                        const std::function<void(std::size_t, std::size_t)>& work,
                        std::size_t min_chunk = 1) {
    unsigned count = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    count = static_cast<unsigned>(
        std::min<std::size_t>(count, std::max<std::size_t>(n / std::max<std::size_t>(min_chunk, 1), 1)));
    if (count <= 1) {
        work(0, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + count - 1) / count;
    for (unsigned w = 0; w < count; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
}

}  // namespace alm::detail
