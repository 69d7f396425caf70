#include "aplanc/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace aplanc {

std::size_t worker_count(std::size_t n_jobs) {
    if (n_jobs <= 1) return n_jobs;
    std::size_t cap = std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (const char* env = std::getenv("RADAR_APLANC_THREADS")) {
        std::size_t parsed = 1;
        try {
            const long v = std::stol(env);
            parsed = v > 0 ? static_cast<std::size_t>(v) : 1;
        } catch (const std::exception&) {
            parsed = 1;
        }
        cap = std::min(cap, parsed);
    }
    return std::min(n_jobs, cap);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = worker_count(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errs(n);
    auto body = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (std::thread& t : pool) t.join();
    for (std::exception_ptr& e : errs)
        if (e) std::rethrow_exception(e);
}

} // namespace aplanc
