#pragma once

#include <vector>

namespace pfshape {

/// Gauss-Hermite rule for the weight exp(-t^2) on the real line.
/// Nodes are ascending; weights sum to sqrt(pi).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussHermiteRule gauss_hermite(int n);

} // namespace pfshape
