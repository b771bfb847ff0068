#include "metaikg/common.hpp"

#include <cstdlib>
#include <mutex>

namespace metaikg::par {

int thread_count() {
    static const int cached = [] {
        if (const char* env = std::getenv("METAIKG_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw ? int(hw) : 1;
    }();
    return cached;
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    size_t workers = size_t(thread_count());
    if (workers > n) workers = n;
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto body = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace metaikg::par
