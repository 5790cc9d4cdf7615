#include "pfshape/analysis.hpp"

#include "pfshape/error.hpp"

#include <cmath>
#include <limits>

namespace pfshape {

namespace {

double energy_of(std::span<const double> p, std::span<const double> w)
{
    double e = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        e += p[i] * w[i];
    return e;
}

QuadratureSpec refined(const QuadratureSpec& spec)
{
    QuadratureSpec out = spec;
    out.nodes_per_axis = spec.nodes_per_axis + 16;
    out.scheme = QuadratureScheme::GaussHermite;
    return out;
}

// Rounding floor for identities between O(1) information quantities.
constexpr double kRoundingFloor = 1e-12;

} // namespace

OperatingPoint operating_point(const MiEngine& engine, std::span<const double> p, std::string label)
{
    validate_pmf(p, engine.size());
    return {energy_of(p, engine.constellation().energies()), engine.mutual_information(p), std::move(label)};
}

double relative_error(double approx, double target)
{
    if (approx == 0.0)
        return target == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (approx - target) / approx;
}

CheckedEngine::CheckedEngine(const MiEngine& primary)
    : primary_(primary), reference_(primary.constellation(), primary.noise(), refined(primary.quadrature()))
{
}

Prop1Report prop1_residual(const CheckedEngine& engine, std::span<const double> p_tilde,
                           const CapacitySolution& solution)
{
    const MiEngine& fine = engine.reference();
    const MiEngine& base = engine.primary();
    validate_pmf(p_tilde, base.size());
    const auto w = base.constellation().energies();
    const auto& p_star = solution.pmf;

    Prop1Report r;
    for (std::size_t i = 0; i < p_tilde.size(); ++i)
        if (p_star[i] == 0.0 && p_tilde[i] > 0.0)
            r.support_condition = false;

    r.e_tilde = energy_of(p_tilde, w);
    r.e_star = energy_of(p_star, w);
    r.nu = solution.nu;
    r.i_tilde = base.mutual_information(p_tilde);
    r.i_star = base.mutual_information(p_star);
    r.output_kl = base.output_kl(p_tilde, p_star);

    r.i_tilde_error = std::abs(fine.mutual_information(p_tilde) - r.i_tilde);
    r.i_star_error = std::abs(fine.mutual_information(p_star) - r.i_star);
    r.output_kl_error = std::abs(fine.output_kl(p_tilde, p_star) - r.output_kl);

    r.residual = r.i_tilde - (r.i_star + r.nu * (r.e_tilde - r.e_star) - r.output_kl);

    // The identity holds up to the solver's stationarity error weighted by
    // the mass moved between the two PMFs.
    double moved = 0.0;
    for (std::size_t i = 0; i < p_tilde.size(); ++i)
        moved += std::abs(p_tilde[i] - p_star[i]);
    const double kkt_term = solution.kkt_residual * moved;
    const double propagated =
        std::sqrt(r.i_tilde_error * r.i_tilde_error + r.i_star_error * r.i_star_error +
                  r.output_kl_error * r.output_kl_error + kkt_term * kkt_term) +
        kRoundingFloor;
    r.tolerance = 3.0 * propagated;
    r.within_tolerance = r.support_condition ? std::abs(r.residual) <= r.tolerance : r.residual <= r.tolerance;
    return r;
}

Prop1Report block_prop1_residual(const MiEngine& engine, const CapacitySolution& solution, const BlockDesign& design,
                                 const ProgressFn& progress)
{
    const int n = design.n;
    const auto target = product_pmf(solution.pmf, n);
    const auto dyadic = design.joint_dyadic.probs();
    const auto w = engine.constellation().energies();

    Prop1Report r;
    for (std::size_t t = 0; t < target.size(); ++t)
        if (target[t] == 0.0 && dyadic[t] > 0.0)
            r.support_condition = false;

    r.e_tilde = design.per_symbol_energy;
    r.e_star = energy_of(solution.pmf, w);
    r.i_star = solution.mi;
    r.nu = solution.nu;

    // sum_t p~(t) D(h_t || q*(n)) = I~(n) + D(q~(n) || q*(n)).
    const McEstimate cross = engine.block_cross_divergence(dyadic, target, n, progress);
    const double combined = cross.value / n;
    r.i_tilde = design.per_symbol_mi;
    r.i_tilde_error = design.per_symbol_mi_stderr;
    r.output_kl = combined - design.per_symbol_mi;
    r.output_kl_error = std::hypot(cross.std_error / n, design.per_symbol_mi_stderr);
    r.residual = combined - (r.i_star + r.nu * (r.e_tilde - r.e_star));

    double moved = 0.0;
    for (std::size_t t = 0; t < target.size(); ++t)
        moved += std::abs(dyadic[t] - target[t]);
    const double kkt_term = solution.kkt_residual * moved / n;
    r.tolerance = 3.0 * (std::hypot(cross.std_error / n, kkt_term) + kRoundingFloor);
    r.within_tolerance = r.support_condition ? std::abs(r.residual) <= r.tolerance : r.residual <= r.tolerance;
    return r;
}

SlopeReport slope_consistency(CapacitySolver& solver, const CapacitySolution& solution, double delta)
{
    if (!(delta > 0.0))
        throw Error(ErrorCode::InvalidArgument, "delta must be positive");
    const auto range = feasible_energy_range(solver.engine().constellation());
    const double e_star = solution.energy;
    if (e_star - delta < range.min_energy)
        throw Error(ErrorCode::InvalidArgument, "E* - delta lies below the minimum signal energy");

    SlopeReport r;
    r.nu = solution.nu;
    r.constraint_active = solution.power_constraint_active;
    const double c_hi = solver.solve(e_star + delta).mi;
    const double c_lo = solver.solve(e_star - delta).mi;
    r.central_difference = (c_hi - c_lo) / (2.0 * delta);
    if (solution.nu > solver.options().tol) {
        r.relative_mismatch = std::abs(solution.nu - r.central_difference) / solution.nu;
    } else {
        r.defined = false;
        r.relative_mismatch = std::abs(r.central_difference) <= solver.options().tol ? 0.0 : std::abs(r.central_difference);
    }
    return r;
}

} // namespace pfshape
