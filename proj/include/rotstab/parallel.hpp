#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace rotstab {

/// Run the jobs on up to n_workers threads (index order handed out
/// atomically). Exceptions propagate from the first failing job.
inline void run_job_pool(std::vector<std::function<void()>>& jobs, unsigned n_workers) {
    if (jobs.empty()) return;
    n_workers = std::max(1u, std::min<unsigned>(n_workers, jobs.size()));
    if (n_workers == 1) {
        for (auto& j : jobs) j();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex err_mutex;
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                jobs[i]();
            } catch (...) {
                std::scoped_lock lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rotstab
