#ifndef FDB_PARALLEL_HPP
#define FDB_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fdb {

/// Resolves a requested thread count: a positive request wins, otherwise the
/// FDB_THREADS environment variable, otherwise hardware concurrency.
inline std::size_t resolve_threads(std::size_t requested = 0)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("FDB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0)
                return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Splits [0, count) into at most `threads` contiguous chunks and calls
/// fn(begin, end, chunk) on each. Chunk boundaries depend only on (count,
/// threads); callers that need thread-count-independent results must make
/// their reduction order-independent. The first exception thrown by any
/// chunk is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn)
{
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads <= 1 || count < 2) {
        if (count > 0)
            fn(std::size_t{0}, count, std::size_t{0});
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        const std::size_t base = count / threads;
        const std::size_t extra = count % threads;
        std::size_t begin = 0;
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t end = begin + base + (t < extra ? 1 : 0);
            workers.emplace_back([&, begin, end, t] {
                try {
                    fn(begin, end, t);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            });
            begin = end;
        }
    }
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace fdb

#endif
