#pragma once

#include "pfshape/capacity_solver.hpp"
#include "pfshape/dyadic.hpp"
#include "pfshape/mi_engine.hpp"

#include <span>
#include <vector>

namespace pfshape {

/// GHC approximation of the n-fold product of a capacity-achieving PMF,
/// with its operating point per channel use.
struct BlockDesign {
    int n = 1;
    DyadicPmf joint_dyadic{std::vector<int>{0}};
    double per_symbol_energy = 0.0;
    double per_symbol_mi = 0.0;
    double per_symbol_mi_stderr = 0.0;  ///< 0 for n = 1 (quadrature, not Monte Carlo)
    double per_symbol_kl = 0.0;         ///< D(p~(n) || p*(n)) / n
};

/// Joint PMF of n independent uses; tuple (i1, ..., in) sits at the base-m
/// positional index with i1 most significant. Throws Error(BlockTooLarge)
/// above 2^24 entries.
std::vector<double> product_pmf(std::span<const double> p, int n);

/// Average energy per channel use, sum_t p(t) ||x_t||^2 / n, summed exactly
/// over the joint alphabet.
double block_energy_per_symbol(std::span<const double> joint, std::span<const double> energies, int n);

BlockDesign design_block(const MiEngine& engine, const CapacitySolution& solution, int n,
                         const ProgressFn& progress = {});

} // namespace pfshape
