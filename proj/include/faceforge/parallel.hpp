#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace faceforge {

// Runs fn(i) for i in [0, n) across a small thread pool. Callers keep
// determinism by writing to index-addressed slots; exceptions must be
// handled inside fn.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         int workers = 0) {
    if (n == 0)
        return;
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    std::size_t count = workers > 0 ? std::size_t(workers) : hw;
    count = std::min({count, n, std::size_t(8)});
    if (count <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t)
        pool.emplace_back([&]() {
            while (true) {
                std::size_t i = cursor.fetch_add(1);
                if (i >= n)
                    return;
                fn(i);
            }
        });
    for (auto& t : pool)
        t.join();
}

} // namespace faceforge
