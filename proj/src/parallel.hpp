#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace pfshape::detail {

// Splits [0, count) into contiguous ranges, one per worker. fn(begin, end)
// must only touch state owned by its range.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
    if (workers <= 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t step = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * step;
        const std::size_t end = std::min(count, begin + step);
        if (begin >= end)
            break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

// Pairwise summation; the result depends only on the order of `values`.
inline double pairwise_sum(const double* values, std::size_t count)
{
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i)
            s += values[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

} // namespace pfshape::detail
