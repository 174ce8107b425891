#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace gwtails {

//! Logical core count, at least 1.
inline int default_workers()
{
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

/*!
 * Split [0, count) into fixed chunks of `chunk` items, evaluate
 * `work(begin, end)` for each chunk on up to `workers` threads and fold the
 * chunk results in chunk order. Chunk boundaries do not depend on the worker
 * count, so the result is bit-identical for any number of workers.
 *
 * The first exception (in chunk order) is rethrown after all threads join.
 */
template <class Result, class Work, class Merge>
Result parallel_reduce(std::int64_t count, int workers, std::int64_t chunk, Result init, Work work, Merge merge)
{
    if (count <= 0) return init;
    chunk = std::max<std::int64_t>(1, chunk);
    const std::int64_t chunks = (count + chunk - 1) / chunk;
    std::vector<std::optional<Result>> results(static_cast<std::size_t>(chunks));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
    std::atomic<std::int64_t> next{0};

    auto run = [&] {
        while (true) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= chunks) return;
            const std::int64_t begin = c * chunk;
            const std::int64_t end = std::min(count, begin + chunk);
            try {
                results[static_cast<std::size_t>(c)].emplace(work(begin, end));
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        }
    };

    const int threads = static_cast<int>(std::min<std::int64_t>(std::max(1, workers), chunks));
    if (threads == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }

    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    Result acc = std::move(init);
    for (auto& r : results) merge(acc, std::move(*r));
    return acc;
}

}  // namespace gwtails
