#pragma once

#include "pfshape/mi_engine.hpp"

#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace pfshape {

/// Capacity-achieving PMF under an average power constraint together with
/// the KKT multipliers that certify it.
struct CapacitySolution {
    std::vector<double> pmf;
    double nu = 0.0;      ///< power-constraint multiplier, equals C'(E*)
    double lambda = 0.0;  ///< simplex multiplier
    std::vector<double> mu;
    double energy = 0.0;  ///< E* = w^T p*
    double mi = 0.0;      ///< I* in nats
    double kkt_residual = 0.0;
    bool power_constraint_active = false;
    double e_bar = std::numeric_limits<double>::infinity();
};

struct CapacityCurvePoint {
    double energy = 0.0;
    double capacity = 0.0;
    double nu = 0.0;
    bool constraint_active = false;
};

struct SolverOptions {
    double tol = 1e-7;                 ///< bound on the KKT residual
    int max_inner_iterations = 10'000; ///< fixed-point iterations per multiplier value, summed
    int max_outer_iterations = 100;    ///< bisection steps on nu
    double support_threshold = 1e-10;
};

/// Max over symbols of the stationarity violation
///   dI/dp_i <= lambda + nu w_i, with equality where p_i > support_threshold.
double kkt_residual(const MiEngine& engine, std::span<const double> pmf, double nu, double lambda,
                    double support_threshold = 1e-10);

/// Maximizes I(p) subject to the simplex and w^T p <= e_bar.
///
/// Dual decomposition: for fixed nu the Lagrangian I(p) - nu w^T p is
/// maximized with Blahut-Arimoto-type multiplicative updates, and nu is
/// bisected until the energy target is bracketed. The bracketed point is then
/// refined by Newton's method on the KKT equations restricted to the current
/// support, adding symbols whose stationarity condition is violated and
/// dropping symbols driven to zero. The unconstrained optimum is cached, and
/// consecutive solves warm start from the previous solution.
class CapacitySolver {
public:
    explicit CapacitySolver(const MiEngine& engine, SolverOptions options = {});

    /// e_bar may be +infinity. Throws Error(Infeasible) when e_bar is below
    /// the smallest symbol energy and ConvergenceError on iteration caps.
    CapacitySolution solve(double e_bar);

    const CapacitySolution& unconstrained();

    const MiEngine& engine() const noexcept { return engine_; }
    const SolverOptions& options() const noexcept { return options_; }

private:
    struct Polished {
        std::vector<double> pmf;
        double nu;
        double lambda;
        double residual;
    };

    double fixed_point(std::vector<double>& p, double nu, int max_iterations, double gap_tol, int& budget) const;
    std::optional<Polished> polish(std::vector<double> p, double nu, std::optional<double> e_bar) const;
    CapacitySolution finalize(const Polished& polished, double e_bar, bool active) const;
    CapacitySolution solve_at_minimum_energy(double e_bar) const;
    CapacitySolution solve_active(double e_bar);

    const MiEngine& engine_;
    SolverOptions options_;
    std::optional<CapacitySolution> unconstrained_;
    std::optional<CapacitySolution> last_active_;
};

/// One-shot convenience wrapper around CapacitySolver.
CapacitySolution solve_capacity(const MiEngine& engine, double e_bar, double tol = 1e-7);

/// Solves at every grid energy (in the given order, warm starting from the
/// previous point). Per-point failures are rethrown with the grid index in
/// the message. Concavity is not enforced here; see curve_is_concave.
std::vector<CapacityCurvePoint> capacity_curve(const MiEngine& engine, std::span<const double> energy_grid,
                                               double tol = 1e-7);

/// Checks that capacities are nondecreasing and slopes nonincreasing along
/// increasing energy, and that second differences are <= slack.
bool curve_is_concave(std::span<const CapacityCurvePoint> curve, double slack = 1e-6);

} // namespace pfshape
