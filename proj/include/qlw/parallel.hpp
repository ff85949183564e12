#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qlw {

/// Resolves a thread-count request: 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers (dynamic
/// scheduling). fn must only write to slots owned by i. The first exception
/// thrown by any call is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace qlw
