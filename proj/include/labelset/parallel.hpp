#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace labelset {

// Worker cap: LABELSET_THREADS when set (minimum 1), else hardware concurrency.
std::size_t max_threads();

// Runs fn(begin, end) over fixed-size chunks of [0, n). Chunk boundaries are
// independent of the worker count, so per-element output is bitwise identical
// whether this runs on 1 thread or 16. Only safe for bodies without
// cross-chunk writes; reductions stay serial elsewhere.
template <typename Fn>
void parallel_chunks_on(std::size_t n, std::size_t chunk, std::size_t workers, Fn&& fn) {
    if (n == 0) return;
    const std::size_t num_chunks = (n + chunk - 1) / chunk;
    if (workers > num_chunks) workers = num_chunks;
    if (workers <= 1) {
        fn(static_cast<std::size_t>(0), n);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= num_chunks) break;
                const std::size_t begin = c * chunk;
                const std::size_t end = begin + chunk < n ? begin + chunk : n;
                fn(begin, end);
            }
        });
    }
    for (auto& t : pool) t.join();
}

template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t chunk, Fn&& fn) {
    parallel_chunks_on(n, chunk, max_threads(), std::forward<Fn>(fn));
}

}  // namespace labelset
