#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fhjam {

/// Splits [0, count) into contiguous blocks and runs body(begin, end) on up
/// to `threads` workers. Blocks are assigned statically, so as long as body
/// writes only to slots indexed by its range the result does not depend on
/// the thread count. The first exception thrown by a worker is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    if (count == 0) return;
    const std::size_t workers = std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, count);
    if (workers == 1) {
        body(std::size_t{0}, count);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        const std::size_t chunk = count / workers;
        const std::size_t extra = count % workers;
        std::size_t begin = 0;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t end = begin + chunk + (w < extra ? 1 : 0);
            pool.emplace_back([&, w, begin, end] {
                try {
                    body(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
            begin = end;
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace fhjam
