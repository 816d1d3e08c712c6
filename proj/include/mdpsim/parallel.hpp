#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <future>

namespace mdpsim {

/// Calls fn(0..n-1) on up to `jobs` threads. Exceptions propagate from the
/// lowest-numbered failing call that was waited on.
inline void parallelFor(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn)
{
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::deque<std::future<void>> pending;
    for (std::size_t i = 0; i < n; ++i) {
        if (pending.size() >= jobs) {
            pending.front().get();
            pending.pop_front();
        }
        pending.push_back(std::async(std::launch::async, fn, i));
    }
    for (auto& p : pending)
        p.get();
}

} // namespace mdpsim
