#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace panelms {

/// Worker count used when a caller passes 0: PANELMS_THREADS if set,
/// otherwise the hardware concurrency.
inline std::size_t default_thread_count() {
    if (const char* env = std::getenv("PANELMS_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/**
 * Runs body(k) for k in [0, n) over `threads` workers using static
 * contiguous chunks. Each index is visited exactly once, so results written
 * per index are independent of scheduling. The first exception thrown by any
 * worker is rethrown on the calling thread.
 */
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
    if (threads == 0) {
        threads = default_thread_count();
    }
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t k = 0; k < n; ++k) {
            body(k);
        }
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w) {
            const std::size_t begin = n * w / threads;
            const std::size_t end = n * (w + 1) / threads;
            workers.emplace_back([&, begin, end] {
                try {
                    for (std::size_t k = begin; k < end; ++k) {
                        body(k);
                    }
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace panelms
