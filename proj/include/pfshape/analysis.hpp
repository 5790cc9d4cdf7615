#pragma once

#include "pfshape/block_shaper.hpp"
#include "pfshape/capacity_solver.hpp"
#include "pfshape/mi_engine.hpp"

#include <span>
#include <string>

namespace pfshape {

/// (average energy per use, mutual information per use) of an input PMF.
struct OperatingPoint {
    double energy = 0.0;
    double mi = 0.0;
    std::string label;
};

OperatingPoint operating_point(const MiEngine& engine, std::span<const double> p, std::string label = {});

/// Relative deviation (approx - target) / approx, the convention used for
/// every design-versus-target percentage this library reports.
double relative_error(double approx, double target);

/// Quadrature error estimates come from re-evaluating on a finer
/// Gauss-Hermite grid (nodes + 16 per axis).
class CheckedEngine {
public:
    explicit CheckedEngine(const MiEngine& primary);

    const MiEngine& primary() const noexcept { return primary_; }
    const MiEngine& reference() const noexcept { return reference_; }

private:
    const MiEngine& primary_;
    MiEngine reference_;
};

/// Outcome of checking  I~ = I* + nu* (E~ - E*) - D(q~ || q*).
struct Prop1Report {
    double residual = 0.0;     ///< I~ - [I* + nu*(E~ - E*) - D(q~||q*)]
    double tolerance = 0.0;    ///< 3 x propagated numerical error
    bool support_condition = true;  ///< p~_i = 0 wherever p*_i = 0
    bool within_tolerance = false;  ///< |residual| <= tol, or residual <= tol when the support condition fails
    double e_tilde = 0.0;
    double i_tilde = 0.0;
    double e_star = 0.0;
    double i_star = 0.0;
    double nu = 0.0;
    double output_kl = 0.0;
    double i_tilde_error = 0.0;
    double i_star_error = 0.0;
    double output_kl_error = 0.0;
};

/// The three terms come from three separate evaluations: mutual information
/// of p~, exact energy sums, and the output-density KL divergence.
Prop1Report prop1_residual(const CheckedEngine& engine, std::span<const double> p_tilde,
                           const CapacitySolution& solution);

/// Per-use block form: I~_n = I* + nu*(E~_n - E*) - D(q~(n) || q*(n)) / n,
/// with I~_n + D/n estimated jointly by Monte Carlo.
Prop1Report block_prop1_residual(const MiEngine& engine, const CapacitySolution& solution, const BlockDesign& design,
                                 const ProgressFn& progress = {});

struct SlopeReport {
    double nu = 0.0;
    double central_difference = 0.0;
    double relative_mismatch = 0.0;  ///< |nu - cd| / nu; |cd| when the slope is undefined
    bool constraint_active = false;
    bool defined = true;             ///< false when nu* = 0 (plateau)
};

/// Compares nu* with (C(E*+delta) - C(E*-delta)) / (2 delta).
SlopeReport slope_consistency(CapacitySolver& solver, const CapacitySolution& solution, double delta);

} // namespace pfshape
