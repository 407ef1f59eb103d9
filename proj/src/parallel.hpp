#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace pdn::detail {

/// Runs body(k) for k in [0, count) on up to `workers` threads (0: hardware
/// concurrency). Tasks are claimed in index order; body must not throw.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body body) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    const auto threads = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (threads <= 1) {
        for (std::size_t k = 0; k < count; ++k) body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) body(k);
        });
    }
}

}  // namespace pdn::detail
