#pragma once

#include "pfshape/analysis.hpp"
#include "pfshape/constellation.hpp"
#include "pfshape/mi_engine.hpp"

#include <span>
#include <vector>

namespace pfshape {

struct SgCurvePoint {
    double lambda = 0.0;
    double energy = 0.0;
    double mi = 0.0;
};

/// Maxwell-Boltzmann PMF p_i ~ exp(-lambda w_i). Any real lambda is accepted:
/// lambda = 0 is uniform, lambda > 0 favours low-energy points and
/// lambda < 0 high-energy points.
std::vector<double> sampled_gaussian_pmf(const Constellation& c, double lambda);

double sampled_gaussian_energy(const Constellation& c, double lambda);

/// Inverts the strictly decreasing map lambda -> E(lambda) by bisection to
/// 1e-12 relative energy accuracy. Throws Error(Infeasible) unless the
/// energy lies strictly between the extreme symbol energies.
double sampled_gaussian_lambda(const Constellation& c, double energy);

std::vector<SgCurvePoint> sg_curve(const MiEngine& engine, std::span<const double> energy_grid);

/// Maximizer of I_SG(E) over [lo, hi]: scan with `step`, then golden-section
/// refinement around the best grid point.
SgCurvePoint sg_peak(const MiEngine& engine, double lo, double hi, double step = 0.1);

/// Operating point of the Huffman code of the sampled-Gaussian PMF.
OperatingPoint huffman_shaping_point(const MiEngine& engine, double lambda);

/// True when no point carries more than `tol` more probability than a point
/// of strictly smaller energy (energies closer than 1e-9 relative count as
/// equal).
bool is_monotone_in_energy(std::span<const double> p, std::span<const double> energies, double tol = 1e-9);

} // namespace pfshape
