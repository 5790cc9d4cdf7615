#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pfshape {

using Complex = std::complex<double>;

/// Finite set of complex signal points with cached energies |x_i|^2.
///
/// Immutable after construction. Points must be finite and pairwise distinct;
/// a single point is accepted here (capacity computations require m >= 2 and
/// check that themselves).
class Constellation {
public:
    explicit Constellation(std::vector<Complex> points, std::string label = {});

    std::size_t size() const noexcept { return points_.size(); }
    std::span<const Complex> points() const noexcept { return points_; }
    std::span<const double> energies() const noexcept { return energies_; }
    const Complex& point(std::size_t i) const { return points_.at(i); }
    double energy(std::size_t i) const { return energies_.at(i); }
    const std::string& label() const noexcept { return label_; }

    /// Same constellation with every point multiplied by `factor` (> 0).
    Constellation scaled(double factor) const;

private:
    std::vector<Complex> points_;
    std::vector<double> energies_;
    std::string label_;
};

struct EnergyRange {
    double min_energy;
    double max_energy;
};

/// Square QAM grid of `order` points (order = k^2, k >= 2), symmetric about
/// the origin with uniform spacing, scaled so the corner points have energy
/// `max_energy`. Index r*k + c is row r (top row first, imaginary part
/// decreasing) and column c (real part increasing).
Constellation make_square_qam(int order, double max_energy);

EnergyRange feasible_energy_range(const Constellation& c) noexcept;

/// Parses `{"points": [[re, im], ...], "label": "..."}`.
Constellation parse_constellation_json(const std::string& text);
Constellation load_constellation(const std::filesystem::path& path);

} // namespace pfshape
