#include "smallnoise/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>

namespace smallnoise {

namespace {
std::atomic<unsigned> g_default_threads{0};
}

unsigned default_threads() {
    unsigned n = g_default_threads.load();
    if (n == 0) {
        n = std::thread::hardware_concurrency();
    }
    return std::max(1u, n);
}

void set_default_threads(unsigned n) { g_default_threads.store(n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads) {
    if (n == 0) {
        return;
    }
    unsigned workers = threads == 0 ? default_threads() : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = static_cast<std::size_t>(w) * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) {
            break;
        }
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) {
                    body(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

}  // namespace smallnoise
