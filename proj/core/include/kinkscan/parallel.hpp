#ifndef KINKSCAN_PARALLEL_HPP
#define KINKSCAN_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kinkscan {

// Worker cap: KINKSCAN_THREADS environment variable; 0 or unset means one
// worker per hardware thread.
int worker_count();

// Runs fn(i) for i in [0, count) on up to worker_count() threads with a
// static stride partition. Each index writes only its own result slot, so
// aggregation is order-independent and output is identical for any thread
// count. The first exception thrown by a worker is rethrown.
template <class F>
void parallel_for(std::size_t count, F&& fn) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace kinkscan

#endif
