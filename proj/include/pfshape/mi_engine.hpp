#pragma once

#include "pfshape/constellation.hpp"
#include "pfshape/pmf.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pfshape {

/// Zero-mean circularly symmetric complex Gaussian noise; `variance` is the
/// total E|Z|^2 (half of it per real dimension).
struct NoiseModel {
    double variance = 1.0;
};

enum class QuadratureScheme { GaussHermite, MonteCarlo };

struct QuadratureSpec {
    int nodes_per_axis = 48;
    QuadratureScheme scheme = QuadratureScheme::GaussHermite;
    std::uint64_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const;
};

/// Monte Carlo estimate with its standard error.
struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Called with the completed fraction in 10% increments.
using ProgressFn = std::function<void(double)>;

/// Largest joint alphabet (m^n) accepted by block operations.
inline constexpr std::uint64_t kMaxBlockEntries = std::uint64_t{1} << 24;

/// H(Y|X) = ln(pi e sigma^2) in nats.
double conditional_entropy(const NoiseModel& noise);

/// Information quantities of a finite constellation in complex Gaussian noise.
///
/// All values are in nats. Single-letter integrals over C use a tensor
/// Gauss-Hermite grid centred on each signal point after whitening by the
/// noise standard deviation. The ratios h(x_i + z_k - x_j) / h(z_k) do not
/// depend on the PMF, so they are tabulated once when the table fits in
/// memory; every evaluation is then a contraction against p.
///
/// Block (n >= 2) quantities are estimated by Monte Carlo with a fixed chunk
/// layout, so results are identical for a given seed regardless of the
/// thread count.
class MiEngine {
public:
    MiEngine(Constellation constellation, NoiseModel noise, QuadratureSpec quad = {});

    const Constellation& constellation() const noexcept { return constellation_; }
    const NoiseModel& noise() const noexcept { return noise_; }
    const QuadratureSpec& quadrature() const noexcept { return quad_; }
    std::size_t size() const noexcept { return constellation_.size(); }
    std::size_t node_count() const noexcept { return node_weights_.size(); }

    /// D(h_i || q) for every symbol i, where q is the output density of p.
    std::vector<double> divergences(std::span<const double> p) const;

    /// Divergences plus the Jacobian dD_i/dp_j = -E_{h_i}[h_j / q],
    /// row-major m x m.
    void divergences_and_jacobian(std::span<const double> p, std::vector<double>& divergences,
                                  std::vector<double>& jacobian) const;

    /// I(p) = H(Y) - H(Y|X). Returns exactly 0 for a point mass.
    double mutual_information(std::span<const double> p) const;

    /// dI/dp_i = D(h_i || q) - 1.
    std::vector<double> gradient(std::span<const double> p) const;

    /// The mutual-information functional evaluated on a nonnegative vector
    /// that need not sum to one: sum_j w_j D(h_j || sum_i w_i h_i).
    double raw_functional(std::span<const double> weights) const;

    /// D(q1 || q2) between the output densities of p1 and p2.
    double output_kl(std::span<const double> p1, std::span<const double> p2) const;

    double output_density(std::span<const double> p, Complex y) const;

    /// I(p^(n)) in nats per block for a joint PMF over m^n tuples
    /// (base-m positional index, first symbol most significant).
    McEstimate block_mutual_information(std::span<const double> joint, int n,
                                        const ProgressFn& progress = {}) const;

    /// D(q1^(n) || q2^(n)) per block, sampling from q1^(n).
    McEstimate block_output_kl(std::span<const double> joint1, std::span<const double> joint2, int n,
                               const ProgressFn& progress = {}) const;

    /// sum_t p1(t) D(h_t || q2^(n)) per block, sampling from q1^(n).
    McEstimate block_cross_divergence(std::span<const double> joint1, std::span<const double> joint2,
                                      int n, const ProgressFn& progress = {}) const;

private:
    // out[i * nodes + k] = q(x_i + z_k) / h(z_k) for the mixture with weights p.
    void mixture_ratios(std::span<const double> p, std::vector<double>& out) const;
    void kernel_row(std::size_t i, std::size_t k, double* row) const;

    struct MixtureRef {
        std::span<const double> joint;
        double coefficient;
    };
    McEstimate monte_carlo(std::span<const double> sample_joint, int n, std::span<const MixtureRef> refs,
                           const ProgressFn& progress) const;

    Constellation constellation_;
    NoiseModel noise_;
    QuadratureSpec quad_;
    std::vector<Complex> node_offsets_;  // z_k
    std::vector<double> node_weights_;   // sum to 1
    std::vector<double> kernel_;         // [i][k][j], empty if tabulation is too large
};

} // namespace pfshape
