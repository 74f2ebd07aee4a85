#include "annealnqs/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "annealnqs/error.hpp"

namespace annealnqs {

const char* to_string(Errc code) {
    switch (code) {
        case Errc::invalid_argument: return "invalid-argument";
        case Errc::dimension_too_small: return "dimension-too-small";
        case Errc::negative_field: return "negative-field";
        case Errc::length_mismatch: return "length-mismatch";
        case Errc::index_out_of_range: return "index-out-of-range";
        case Errc::non_finite: return "non-finite";
        case Errc::too_large: return "too-large";
        case Errc::capacity_exceeded: return "capacity-exceeded";
        case Errc::solver_failure: return "solver-failure";
        case Errc::not_converged: return "not-converged";
    }
    return "unknown";
}

std::size_t worker_count() {
    if (const char* env = std::getenv("NQS_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for_chunks(std::size_t n, std::size_t chunk,
                         const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    chunk = std::max<std::size_t>(1, chunk);
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    const std::size_t workers = std::min(worker_count(), n_chunks);
    auto run_chunk = [&](std::size_t c) { body(c, c * chunk, std::min(n, (c + 1) * chunk)); };
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < n_chunks; c = next++) {
                try {
                    run_chunk(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace annealnqs
