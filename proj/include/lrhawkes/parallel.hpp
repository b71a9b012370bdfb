#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace lrhawkes {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Fixed chunk width for parallel reductions. Chunk boundaries depend only on
// the problem size, and chunk partials are combined in index order, so
// results are byte-identical for any thread count.
inline constexpr std::size_t kReduceChunk = 4096;

inline std::size_t chunk_count(std::size_t n, std::size_t chunk = kReduceChunk) {
    return n == 0 ? 0 : (n + chunk - 1) / chunk;
}

// Runs body(chunk_index, begin, end) over [0, n) split into fixed chunks.
// Chunks are claimed via an atomic counter; the body must only write to
// per-chunk state.
template <class Body>
void parallel_chunks(std::size_t n, int threads, Body&& body,
                     std::size_t chunk = kReduceChunk) {
    const std::size_t nchunks = chunk_count(n, chunk);
    if (nchunks == 0) return;
    threads = resolve_threads(threads);
    if (threads <= 1 || nchunks == 1) {
        for (std::size_t c = 0; c < nchunks; ++c)
            body(c, c * chunk, std::min(n, (c + 1) * chunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            body(c, c * chunk, std::min(n, (c + 1) * chunk));
        }
    };
    std::vector<std::thread> pool;
    const int nt = std::min<std::size_t>(threads, nchunks);
    pool.reserve(nt - 1);
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

}  // namespace lrhawkes
