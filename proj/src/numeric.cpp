#include "deltalab/numeric.hpp"

#include <atomic>
#include <cstdlib>

namespace deltalab {

int thread_count() {
    if (const char* env = std::getenv("DELTA_LAB_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void run_chunked(i64 begin, i64 end, i64 chunk, int threads,
                 const std::function<void(std::size_t, i64, i64)>& fn) {
    if (begin >= end) return;
    if (chunk < 1) chunk = 1;
    std::size_t n_chunks = static_cast<std::size_t>((end - begin + chunk - 1) / chunk);
    if (threads < 1) threads = 1;
    if (static_cast<std::size_t>(threads) > n_chunks) threads = static_cast<int>(n_chunks);

    if (threads == 1) {
        for (std::size_t ci = 0; ci < n_chunks; ++ci) {
            i64 lo = begin + static_cast<i64>(ci) * chunk;
            i64 hi = std::min(end, lo + chunk);
            fn(ci, lo, hi);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t ci = next.fetch_add(1);
                if (ci >= n_chunks) return;
                i64 lo = begin + static_cast<i64>(ci) * chunk;
                i64 hi = std::min(end, lo + chunk);
                fn(ci, lo, hi);
            }
        });
    }
    for (auto& th : pool) th.join();
}

cplx chunked_sum(i64 begin, i64 end, i64 chunk,
                 const std::function<cplx(i64)>& term) {
    if (begin >= end) return {0.0, 0.0};
    if (chunk < 1) chunk = 1;
    std::size_t n_chunks = static_cast<std::size_t>((end - begin + chunk - 1) / chunk);
    std::vector<cplx> partial(n_chunks, cplx{0.0, 0.0});
    run_chunked(begin, end, chunk, thread_count(),
                [&](std::size_t ci, i64 lo, i64 hi) {
                    KahanSumC acc;
                    for (i64 i = lo; i < hi; ++i) acc.add(term(i));
                    partial[ci] = acc.value();
                });
    return pairwise_sum(partial);
}

}  // namespace deltalab
