#pragma once

// Minimal deterministic work sharing. Results never depend on the thread
// count because work is split into fixed-size chunks that are reduced in
// index order by the caller.

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace graphon {

// 0 means auto. Env GRAPHON_LDP_THREADS is the fallback when the caller
// passes 0; failing that, hardware_concurrency.
inline unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GRAPHON_LDP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Runs fn(chunk_index) for chunk_index in [0, chunks). Chunks are claimed
// from a shared counter; fn must write only chunk-local state.
template <typename Fn>
void parallel_chunks(std::size_t chunks, unsigned threads, Fn&& fn) {
    threads = resolve_thread_count(threads);
    if (threads <= 1 || chunks <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            fn(c);
        }
    };
    std::vector<std::thread> pool;
    const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
    pool.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace graphon
