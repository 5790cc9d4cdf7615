#include "pfshape/baselines.hpp"

#include "pfshape/dyadic.hpp"
#include "pfshape/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pfshape {

std::vector<double> sampled_gaussian_pmf(const Constellation& c, double lambda)
{
    if (!std::isfinite(lambda))
        throw Error(ErrorCode::InvalidArgument, "lambda must be finite");
    const auto w = c.energies();
    // Shift by the largest exponent, i.e. the extreme energy on the favoured side.
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    const double ref = lambda >= 0.0 ? *lo : *hi;
    std::vector<double> p(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        p[i] = std::exp(-lambda * (w[i] - ref));
    const double z = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p)
        v /= z;
    return p;
}

double sampled_gaussian_energy(const Constellation& c, double lambda)
{
    const auto p = sampled_gaussian_pmf(c, lambda);
    const auto w = c.energies();
    double e = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        e += p[i] * w[i];
    return e;
}

double sampled_gaussian_lambda(const Constellation& c, double energy)
{
    const auto range = feasible_energy_range(c);
    if (!(energy > range.min_energy && energy < range.max_energy))
        throw Error(ErrorCode::Infeasible, "energy outside the open range reachable by sampled-Gaussian PMFs");

    double lo = -1.0;
    double hi = 1.0;
    while (sampled_gaussian_energy(c, hi) > energy)
        hi *= 2.0;
    while (sampled_gaussian_energy(c, lo) < energy)
        lo *= 2.0;
    const double tol = 1e-12 * std::max(1.0, energy);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double e = sampled_gaussian_energy(c, mid);
        if (std::abs(e - energy) <= tol)
            return mid;
        if (e > energy)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid)))
            break;
    }
    return 0.5 * (lo + hi);
}

std::vector<SgCurvePoint> sg_curve(const MiEngine& engine, std::span<const double> energy_grid)
{
    std::vector<SgCurvePoint> out;
    out.reserve(energy_grid.size());
    for (std::size_t g = 0; g < energy_grid.size(); ++g) {
        double lambda = 0.0;
        try {
            lambda = sampled_gaussian_lambda(engine.constellation(), energy_grid[g]);
        } catch (const Error& e) {
            throw Error(e.code(), "grid index " + std::to_string(g) + ": " + e.what());
        }
        const auto p = sampled_gaussian_pmf(engine.constellation(), lambda);
        out.push_back({lambda, energy_grid[g], engine.mutual_information(p)});
    }
    return out;
}

SgCurvePoint sg_peak(const MiEngine& engine, double lo, double hi, double step)
{
    if (!(lo < hi) || !(step > 0.0))
        throw Error(ErrorCode::InvalidArgument, "sg_peak needs lo < hi and a positive step");
    const Constellation& c = engine.constellation();
    auto eval = [&](double e) {
        const double lambda = sampled_gaussian_lambda(c, e);
        return SgCurvePoint{lambda, e, engine.mutual_information(sampled_gaussian_pmf(c, lambda))};
    };

    SgCurvePoint best = eval(lo);
    const auto steps = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int s = 1; s <= steps; ++s) {
        const SgCurvePoint pt = eval(lo + s * step);
        if (pt.mi > best.mi)
            best = pt;
    }

    double a = std::max(lo, best.energy - step);
    double b = std::min(hi, best.energy + step);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    SgCurvePoint f1 = eval(x1);
    SgCurvePoint f2 = eval(x2);
    while (b - a > 1e-5) {
        if (f1.mi < f2.mi) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        }
    }
    const SgCurvePoint refined = f1.mi >= f2.mi ? f1 : f2;
    return refined.mi >= best.mi ? refined : best;
}

OperatingPoint huffman_shaping_point(const MiEngine& engine, double lambda)
{
    const auto sg = sampled_gaussian_pmf(engine.constellation(), lambda);
    const auto dyadic = huffman_lengths(sg).probs();
    return operating_point(engine, dyadic, "huffman-shaping");
}

bool is_monotone_in_energy(std::span<const double> p, std::span<const double> energies, double tol)
{
    if (p.size() != energies.size())
        throw Error(ErrorCode::InvalidInput, "PMF and energy vector differ in size");
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });

    // Sweep energy levels in increasing order, tracking the smallest
    // probability seen on strictly lower levels.
    double lower_min = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < order.size()) {
        const double level = energies[order[i]];
        std::size_t j = i;
        double level_min = std::numeric_limits<double>::infinity();
        while (j < order.size() && energies[order[j]] - level <= 1e-9 * std::max(1.0, std::abs(level))) {
            if (p[order[j]] > lower_min + tol)
                return false;
            level_min = std::min(level_min, p[order[j]]);
            ++j;
        }
        lower_min = std::min(lower_min, level_min);
        i = j;
    }
    return true;
}

} // namespace pfshape
