// Bounded worker pool that runs a fixed batch of index-addressed jobs.
// Results land in slots keyed by job index, so output never depends on
// scheduling order.

#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace pth {

// Runs jobs[0..n) on up to `workers` threads. workers <= 1 degrades to a
// plain loop.
inline void run_indexed(size_t job_count, int workers,
                        const std::function<void(size_t)>& job) {
    if (job_count == 0) return;
    if (workers <= 1) {
        for (size_t i = 0; i < job_count; ++i) job(i);
        return;
    }
    std::atomic<size_t> next{0};
    size_t thread_count = std::min<size_t>(static_cast<size_t>(workers), job_count);
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (size_t t = 0; t < thread_count; ++t) {
        threads.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= job_count) return;
                job(i);
            }
        });
    }
    for (auto& th : threads) th.join();
}

} // namespace pth
