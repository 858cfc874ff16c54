#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace heat2d {

// Run fn(i) for i in [0, n). Sequential when requested (benchmark timing mode)
// or when the range is small; otherwise chunked over hardware threads.
// The first exception thrown by any worker is rethrown on the caller.
template <class F>
void parallel_for_index(int n, bool sequential, F&& fn) {
    if (n <= 0) return;
    const unsigned hw = std::thread::hardware_concurrency();
    if (sequential || hw <= 1 || n < 4) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int n_threads = static_cast<int>(std::min<unsigned>(hw, 8));
    std::vector<std::thread> workers;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<int> next{0};
    for (int t = 0; t < n_threads; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace heat2d
