#include "pfshape/quadrature.hpp"

#include "pfshape/error.hpp"

#include <cmath>
#include <numbers>

namespace pfshape {

// Newton iteration on the orthonormal Hermite recurrence, with the usual
// asymptotic initial guesses for the largest roots.
GaussHermiteRule gauss_hermite(int n)
{
    if (n < 1 || n > 512)
        throw Error(ErrorCode::InvalidArgument, "Gauss-Hermite order must be in [1, 512]");

    const double pim4 = std::pow(std::numbers::pi, -0.25);
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    double z = 0.0;

    for (int i = 0; i < half; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[static_cast<std::size_t>(i - 2)];

        double pp = 0.0;
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw Error(ErrorCode::Convergence, "Gauss-Hermite root iteration did not converge");

        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        x[lo] = z;
        x[hi] = -z;
        w[lo] = 2.0 / (pp * pp);
        w[hi] = w[lo];
    }

    // The recurrence produces roots in descending order.
    GaussHermiteRule rule;
    rule.nodes.assign(x.rbegin(), x.rend());
    rule.weights.assign(w.rbegin(), w.rend());
    return rule;
}

} // namespace pfshape
