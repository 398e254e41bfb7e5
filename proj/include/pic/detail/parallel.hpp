#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pic::detail {

// Neumaier compensated accumulator.  Sequential use over a fixed index order
// gives bit-stable sums.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v)
    {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

inline constexpr std::int64_t kBlockSize = 4096;

inline std::int64_t block_count(std::int64_t n)
{
    return (n + kBlockSize - 1) / kBlockSize;
}

// Runs fn(block_index, begin, end) over [0, n) in fixed blocks of kBlockSize.
// The block layout never depends on the worker count, so per-block partial
// results (and anything reduced from them in block order) are identical for
// any number of threads.
inline void for_each_block(std::int64_t n, int threads,
                           const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn)
{
    const std::int64_t blocks = block_count(n);
    threads = std::max(1, threads);
    if (threads == 1 || blocks <= 1) {
        for (std::int64_t b = 0; b < blocks; ++b)
            fn(b, b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::int64_t b = next.fetch_add(1);
            if (b >= blocks) return;
            try {
                fn(b, b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pic::detail
