#include "gaussct/threading.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gaussct {

namespace {

int initial_thread_count() {
    if (const char* env = std::getenv("GAUSSCT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return 0;
}

std::atomic<int> g_threads{initial_thread_count()};

int resolved_threads() {
    int n = g_threads.load();
    if (n <= 0)
        n = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, n);
}

} // namespace

int thread_count() { return resolved_threads(); }

void set_thread_count(int n) { g_threads.store(n); }

void parallel_chunks(std::size_t begin, std::size_t end,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (begin >= end)
        return;
    const std::size_t total = end - begin;
    const std::size_t workers = std::min<std::size_t>(resolved_threads(), total);
    if (workers <= 1) {
        fn(0, begin, end);
        return;
    }
    const std::size_t chunk = (total + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi)
            break;
        pool.emplace_back([=, &fn] { fn(w, lo, hi); });
    }
    for (auto& t : pool)
        t.join();
}

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn) {
    parallel_chunks(begin, end, [&fn](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            fn(i);
    });
}

} // namespace gaussct
