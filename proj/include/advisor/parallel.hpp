#pragma once
/// @file parallel.hpp
/// @brief Bounded-concurrency task execution with order-stable results.

#include <atomic>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "advisor/common.hpp"

namespace advisor {

/// Runs every task on a small worker pool (at most max_in_flight running at
/// once) and returns the results in task order, so concurrent execution is
/// observationally equivalent to a sequential loop.  If tasks throw, all
/// remaining tasks still run and the exception of the lowest task index is
/// rethrown.
template <typename Task>
auto run_indexed(std::vector<Task>& tasks, int max_in_flight)
    -> std::vector<std::invoke_result_t<Task&>> {
    using Result = std::invoke_result_t<Task&>;
    if (max_in_flight < 1) throw ValidationError("run_indexed: max_in_flight must be >= 1");

    const size_t n = tasks.size();
    std::vector<std::optional<Result>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                slots[i] = tasks[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const size_t workers = std::min<size_t>(static_cast<size_t>(max_in_flight), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    for (size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
    }
    std::vector<Result> results;
    results.reserve(n);
    for (size_t i = 0; i < n; ++i) results.push_back(std::move(*slots[i]));
    return results;
}

}  // namespace advisor
