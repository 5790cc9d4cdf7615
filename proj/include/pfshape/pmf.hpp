#pragma once

#include <cstddef>
#include <span>

namespace pfshape {

/// Throws Error(InvalidInput) unless p has `expected_size` finite,
/// nonnegative entries summing to one (within 1e-12 plus rounding slack
/// proportional to the length).
void validate_pmf(std::span<const double> p, std::size_t expected_size);

/// Same check without a size requirement (size must be nonzero).
void validate_pmf(std::span<const double> p);

} // namespace pfshape
