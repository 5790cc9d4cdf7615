#pragma once

#include <random>
#include <vector>

namespace pfshape::test {

// Random PMF of length m with every entry at least `floor` (before
// normalization, floor is added to exponential draws).
inline std::vector<double> random_pmf(std::size_t m, std::mt19937_64& rng, double floor)
{
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> p(m);
    double s = 0.0;
    for (auto& v : p) {
        v = expo(rng) + floor;
        s += v;
    }
    for (auto& v : p)
        v /= s;
    return p;
}

} // namespace pfshape::test
