#include "pfshape/block_shaper.hpp"

#include "pfshape/error.hpp"

#include <algorithm>

namespace pfshape {

std::vector<double> product_pmf(std::span<const double> p, int n)
{
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, "block length must be at least 1");
    validate_pmf(p);
    std::uint64_t len = 1;
    for (int j = 0; j < n; ++j) {
        len *= p.size();
        if (len > kMaxBlockEntries)
            throw Error(ErrorCode::BlockTooLarge, "joint alphabet m^n exceeds 2^24 entries");
    }
    std::vector<double> joint(p.begin(), p.end());
    for (int j = 1; j < n; ++j) {
        std::vector<double> next;
        next.reserve(joint.size() * p.size());
        for (double a : joint)
            for (double b : p)
                next.push_back(a * b);
        joint = std::move(next);
    }
    return joint;
}

double block_energy_per_symbol(std::span<const double> joint, std::span<const double> energies, int n)
{
    const std::size_t m = energies.size();
    double total = 0.0;
    for (std::size_t t = 0; t < joint.size(); ++t) {
        if (joint[t] == 0.0)
            continue;
        double e = 0.0;
        std::size_t rest = t;
        for (int j = 0; j < n; ++j) {
            e += energies[rest % m];
            rest /= m;
        }
        total += joint[t] * e;
    }
    return total / n;
}

BlockDesign design_block(const MiEngine& engine, const CapacitySolution& solution, int n,
                         const ProgressFn& progress)
{
    const auto joint = product_pmf(solution.pmf, n);
    BlockDesign design;
    design.n = n;
    design.joint_dyadic = ghc(joint);

    const auto dyadic = design.joint_dyadic.probs();
    // Support condition: GHC never assigns mass where the target has none.
    for (std::size_t t = 0; t < joint.size(); ++t)
        if (joint[t] == 0.0 && dyadic[t] != 0.0)
            throw Error(ErrorCode::InvalidInput, "dyadic block PMF violates the support condition");

    design.per_symbol_energy = block_energy_per_symbol(dyadic, engine.constellation().energies(), n);
    design.per_symbol_kl = kl_pmf(dyadic, joint) / n;

    const bool point_mass = std::count_if(dyadic.begin(), dyadic.end(), [](double v) { return v > 0.0; }) == 1;
    if (point_mass) {
        design.per_symbol_mi = 0.0;
    } else if (n == 1) {
        design.per_symbol_mi = engine.mutual_information(dyadic);
    } else {
        const McEstimate est = engine.block_mutual_information(dyadic, n, progress);
        design.per_symbol_mi = est.value / n;
        design.per_symbol_mi_stderr = est.std_error / n;
    }
    return design;
}

} // namespace pfshape
