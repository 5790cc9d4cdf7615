#include "pfshape/pmf.hpp"

#include "pfshape/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pfshape {

void validate_pmf(std::span<const double> p, std::size_t expected_size)
{
    if (p.size() != expected_size)
        throw Error(ErrorCode::InvalidInput, "PMF has " + std::to_string(p.size()) + " entries, expected " +
                                                 std::to_string(expected_size));
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0)
            throw Error(ErrorCode::InvalidInput, "PMF entries must be finite and nonnegative");
        sum += v;
    }
    const double tol = 1e-12 + 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(p.size());
    if (std::abs(sum - 1.0) > tol)
        throw Error(ErrorCode::InvalidInput, "PMF entries must sum to 1");
}

void validate_pmf(std::span<const double> p)
{
    if (p.empty())
        throw Error(ErrorCode::InvalidInput, "PMF is empty");
    validate_pmf(p, p.size());
}

} // namespace pfshape
