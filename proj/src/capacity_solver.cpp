#include "pfshape/capacity_solver.hpp"

#include "pfshape/baselines.hpp"
#include "pfshape/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pfshape {

namespace {

constexpr double kNewtonTarget = 1e-13;
constexpr double kInitialSupport = 1e-9;

void normalize(std::vector<double>& p)
{
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p)
        v /= s;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

} // namespace

double kkt_residual(const MiEngine& engine, std::span<const double> pmf, double nu, double lambda,
                    double support_threshold)
{
    const auto grad = engine.gradient(pmf);
    const auto w = engine.constellation().energies();
    double worst = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        const double slack = grad[i] - lambda - nu * w[i];
        worst = std::max(worst, slack);
        if (pmf[i] > support_threshold)
            worst = std::max(worst, std::abs(slack));
    }
    return worst;
}

CapacitySolver::CapacitySolver(const MiEngine& engine, SolverOptions options)
    : engine_(engine), options_(options)
{
    if (!(options_.tol > 0.0))
        throw Error(ErrorCode::InvalidArgument, "solver tolerance must be positive");
}

// Multiplicative updates p_i <- p_i exp(D_i - nu w_i) / Z. Returns the final
// duality gap max_i g_i - sum_i p_i g_i, an upper bound on the suboptimality
// of the Lagrangian at fixed nu.
double CapacitySolver::fixed_point(std::vector<double>& p, double nu, int max_iterations, double gap_tol,
                                   int& budget) const
{
    const auto w = engine_.constellation().energies();
    double gap = std::numeric_limits<double>::infinity();
    std::vector<double> g(p.size());
    for (int it = 0; it < max_iterations && budget > 0; ++it, --budget) {
        const auto d = engine_.divergences(p);
        double avg = 0.0;
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < p.size(); ++i) {
            g[i] = d[i] - nu * w[i];
            avg += p[i] * g[i];
            top = std::max(top, g[i]);
        }
        gap = top - avg;
        if (gap < gap_tol)
            break;
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] *= std::exp(g[i] - top);
        normalize(p);
    }
    return gap;
}

// Newton's method on the KKT equations restricted to a support set S:
//   D_i(p) - 1 - lambda - nu w_i = 0   (i in S)
//   sum_S p_i = 1,  w_S^T p_S = e_bar  (second row only with an active constraint)
// with an outer loop that drops symbols pushed to zero and adds the most
// violating symbol outside S.
std::optional<CapacitySolver::Polished> CapacitySolver::polish(std::vector<double> p, double nu,
                                                               std::optional<double> e_bar) const
{
    const std::size_t m = p.size();
    const auto w = engine_.constellation().energies();
    const bool active = e_bar.has_value();

    std::vector<bool> in_support(m);
    for (std::size_t i = 0; i < m; ++i) {
        in_support[i] = p[i] > kInitialSupport;
        if (!in_support[i])
            p[i] = 0.0;
    }
    normalize(p);

    std::vector<double> d;
    std::vector<double> jac;
    double lambda = 0.0;
    const int max_rounds = 2 * static_cast<int>(m) + 10;

    for (int round = 0; round < max_rounds; ++round) {
        bool converged = false;
        double best = std::numeric_limits<double>::infinity();
        int stalled = 0;
        for (int it = 0; it < 60; ++it) {
            engine_.divergences_and_jacobian(p, d, jac);
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < m; ++i)
                if (in_support[i])
                    idx.push_back(i);
            const std::size_t k = idx.size();
            if (k == 0)
                return std::nullopt;

            lambda = 0.0;
            for (std::size_t i : idx)
                lambda += d[i] - 1.0 - nu * w[i];
            lambda /= static_cast<double>(k);

            const std::size_t dim = k + 1 + (active ? 1 : 0);
            Eigen::VectorXd f(dim);
            double fnorm = 0.0;
            double psum = 0.0;
            double energy = 0.0;
            for (std::size_t a = 0; a < k; ++a) {
                const std::size_t i = idx[a];
                f[static_cast<Eigen::Index>(a)] = d[i] - 1.0 - lambda - nu * w[i];
                psum += p[i];
                energy += p[i] * w[i];
            }
            f[static_cast<Eigen::Index>(k)] = psum - 1.0;
            if (active)
                f[static_cast<Eigen::Index>(k + 1)] = (energy - *e_bar);
            fnorm = f.cwiseAbs().maxCoeff();

            if (fnorm < kNewtonTarget) {
                converged = true;
                break;
            }
            if (fnorm < best * 0.5) {
                best = fnorm;
                stalled = 0;
            } else if (++stalled >= 8) {
                // Rounding floor reached (or divergence): accept only if tiny.
                converged = fnorm < 1e-10;
                break;
            }

            Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                                       static_cast<Eigen::Index>(dim));
            for (std::size_t a = 0; a < k; ++a) {
                const auto ra = static_cast<Eigen::Index>(a);
                for (std::size_t b = 0; b < k; ++b)
                    jm(ra, static_cast<Eigen::Index>(b)) = jac[idx[a] * m + idx[b]];
                jm(ra, static_cast<Eigen::Index>(k)) = -1.0;
                jm(static_cast<Eigen::Index>(k), ra) = 1.0;
                if (active) {
                    jm(ra, static_cast<Eigen::Index>(k + 1)) = -w[idx[a]];
                    jm(static_cast<Eigen::Index>(k + 1), ra) = w[idx[a]];
                }
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(jm);
            if (!lu.isInvertible())
                return std::nullopt;
            const Eigen::VectorXd step = lu.solve(-f);

            bool dropped = false;
            for (std::size_t a = 0; a < k; ++a) {
                const std::size_t i = idx[a];
                p[i] += step[static_cast<Eigen::Index>(a)];
                if (p[i] <= 0.0) {
                    p[i] = 0.0;
                    in_support[i] = false;
                    dropped = true;
                }
            }
            if (active)
                nu += step[static_cast<Eigen::Index>(k + 1)];
            if (dropped) {
                normalize(p);
                best = std::numeric_limits<double>::infinity();
                stalled = 0;
            }
        }
        if (!converged)
            return std::nullopt;
        if (active && nu < 0.0)
            return std::nullopt;

        // d and lambda belong to the current p. Look for violations off S.
        std::size_t worst = m;
        double worst_slack = 0.1 * options_.tol;
        for (std::size_t i = 0; i < m; ++i) {
            if (in_support[i])
                continue;
            const double slack = d[i] - 1.0 - lambda - nu * w[i];
            if (slack > worst_slack) {
                worst_slack = slack;
                worst = i;
            }
        }
        if (worst == m) {
            Polished out{std::move(p), nu, lambda, 0.0};
            return out;
        }
        in_support[worst] = true;
        p[worst] = 1e-6;
        normalize(p);
    }
    return std::nullopt;
}

CapacitySolution CapacitySolver::finalize(const Polished& polished, double e_bar, bool active) const
{
    const auto w = engine_.constellation().energies();
    CapacitySolution sol;
    sol.pmf = polished.pmf;
    for (auto& v : sol.pmf)
        if (v < options_.support_threshold)
            v = 0.0;
    normalize(sol.pmf);
    sol.nu = active ? polished.nu : 0.0;
    sol.e_bar = e_bar;

    const auto d = engine_.divergences(sol.pmf);
    double lambda = 0.0;
    std::size_t support = 0;
    double mi = 0.0;
    for (std::size_t i = 0; i < sol.pmf.size(); ++i) {
        if (sol.pmf[i] > 0.0) {
            lambda += d[i] - 1.0 - sol.nu * w[i];
            mi += sol.pmf[i] * d[i];
            ++support;
        }
    }
    sol.lambda = lambda / static_cast<double>(support);
    sol.mi = support == 1 ? 0.0 : std::max(mi, 0.0);
    sol.energy = dot(sol.pmf, w);
    sol.mu.assign(sol.pmf.size(), 0.0);
    double residual = 0.0;
    for (std::size_t i = 0; i < sol.pmf.size(); ++i) {
        const double slack = d[i] - 1.0 - sol.lambda - sol.nu * w[i];
        residual = std::max(residual, slack);
        if (sol.pmf[i] > 0.0)
            residual = std::max(residual, std::abs(slack));
        else
            sol.mu[i] = std::max(0.0, -slack);
    }
    sol.kkt_residual = residual;
    sol.power_constraint_active = sol.nu > options_.tol;
    if (residual > options_.tol)
        throw ConvergenceError("KKT residual " + std::to_string(residual) + " above tolerance", sol.pmf, residual);
    return sol;
}

const CapacitySolution& CapacitySolver::unconstrained()
{
    if (unconstrained_)
        return *unconstrained_;
    const std::size_t m = engine_.size();
    if (m < 2)
        throw Error(ErrorCode::InvalidInput, "capacity needs at least two signal points");

    std::vector<double> p(m, 1.0 / static_cast<double>(m));
    int budget = options_.max_inner_iterations;
    double gap_tol = 1e-2;
    int chunk = 50;
    while (budget > 0) {
        fixed_point(p, 0.0, chunk, gap_tol, budget);
        if (auto pol = polish(p, 0.0, std::nullopt)) {
            unconstrained_ = finalize(*pol, std::numeric_limits<double>::infinity(), false);
            return *unconstrained_;
        }
        gap_tol *= 0.1;
        chunk *= 2;
    }
    throw ConvergenceError("unconstrained capacity did not converge", p, std::numeric_limits<double>::quiet_NaN());
}

CapacitySolution CapacitySolver::solve(double e_bar)
{
    const std::size_t m = engine_.size();
    if (m < 2)
        throw Error(ErrorCode::InvalidInput, "capacity needs at least two signal points");
    if (std::isnan(e_bar))
        throw Error(ErrorCode::InvalidArgument, "power constraint is NaN");
    const auto range = feasible_energy_range(engine_.constellation());
    const double eps = 1e-12 * std::max(1.0, range.max_energy);
    if (e_bar < range.min_energy - eps)
        throw Error(ErrorCode::Infeasible, "power constraint below the minimum signal energy");

    const CapacitySolution& free = unconstrained();
    if (free.energy <= e_bar + 1e-9) {
        CapacitySolution sol = free;
        sol.e_bar = e_bar;
        return sol;
    }
    if (e_bar <= range.min_energy + eps)
        return solve_at_minimum_energy(e_bar);
    return solve_active(e_bar);
}

// With e_bar equal to the minimum energy only minimum-energy symbols may carry
// mass. nu is the smallest multiplier that makes every excluded symbol satisfy
// stationarity.
CapacitySolution CapacitySolver::solve_at_minimum_energy(double e_bar) const
{
    const auto w = engine_.constellation().energies();
    const auto range = feasible_energy_range(engine_.constellation());
    const double eps = 1e-12 * std::max(1.0, range.max_energy);
    const std::size_t m = w.size();

    std::vector<double> p(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (w[i] <= range.min_energy + eps)
            p[i] = 1.0;
    normalize(p);

    int budget = options_.max_inner_iterations;
    fixed_point(p, 0.0, budget, 1e-14, budget);

    const auto d = engine_.divergences(p);
    double mean_g = 0.0;
    std::size_t support = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (p[i] > 0.0) {
            mean_g += d[i] - 1.0;
            ++support;
        }
    }
    mean_g /= static_cast<double>(support);
    double nu = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (p[i] == 0.0 && w[i] > range.min_energy + eps)
            nu = std::max(nu, (d[i] - 1.0 - mean_g) / (w[i] - range.min_energy));

    Polished pol{p, nu, mean_g - nu * range.min_energy, 0.0};
    return finalize(pol, e_bar, true);
}

CapacitySolution CapacitySolver::solve_active(double e_bar)
{
    const auto w = engine_.constellation().energies();
    const std::size_t m = w.size();

    if (last_active_) {
        if (auto pol = polish(last_active_->pmf, last_active_->nu, e_bar); pol && pol->nu > 0.0) {
            try {
                last_active_ = finalize(*pol, e_bar, true);
                return *last_active_;
            } catch (const ConvergenceError&) {
                // fall through to the bracketing path
            }
        }
    }

    // Cold start: the Maxwell-Boltzmann PMF at e_bar is close to optimal at
    // low energies. nu comes from a p-weighted least-squares fit of
    // D_i = 1 + lambda + nu w_i.
    if (e_bar > feasible_energy_range(engine_.constellation()).min_energy) {
        const auto p0 = sampled_gaussian_pmf(engine_.constellation(), sampled_gaussian_lambda(engine_.constellation(), e_bar));
        const auto d = engine_.divergences(p0);
        double mw = 0.0;
        double md = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            mw += p0[i] * w[i];
            md += p0[i] * d[i];
        }
        double cov = 0.0;
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            cov += p0[i] * (w[i] - mw) * (d[i] - md);
            var += p0[i] * (w[i] - mw) * (w[i] - mw);
        }
        const double nu0 = var > 0.0 ? cov / var : 0.0;
        if (nu0 > 0.0) {
            if (auto pol = polish(p0, nu0, e_bar); pol && pol->nu > 0.0) {
                try {
                    last_active_ = finalize(*pol, e_bar, true);
                    return *last_active_;
                } catch (const ConvergenceError&) {
                }
            }
        }
    }

    int budget = options_.max_inner_iterations;
    auto energy_at = [&](double nu, std::vector<double>& p) {
        fixed_point(p, nu, 200, 1e-5, budget);
        return dot(p, w);
    };

    const std::vector<double> uniform(m, 1.0 / static_cast<double>(m));
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> p_hi = unconstrained().pmf;
    // Zeros are absorbing under multiplicative updates; restart from full support.
    for (std::size_t i = 0; i < m; ++i)
        p_hi[i] = 0.5 * p_hi[i] + 0.5 * uniform[i];
    int outer = 0;
    while (energy_at(hi, p_hi) > e_bar) {
        lo = hi;
        hi *= 2.0;
        if (++outer >= options_.max_outer_iterations || budget <= 0)
            throw ConvergenceError("could not bracket the power multiplier", p_hi,
                                   std::numeric_limits<double>::quiet_NaN());
    }

    std::vector<double> p = p_hi;
    double width = 0.05;
    double mid = 0.5 * (lo + hi);
    for (; outer < options_.max_outer_iterations && budget > 0; ++outer) {
        mid = 0.5 * (lo + hi);
        if (energy_at(mid, p) > e_bar)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= width * hi) {
            if (auto pol = polish(p, 0.5 * (lo + hi), e_bar); pol && pol->nu > 0.0) {
                try {
                    last_active_ = finalize(*pol, e_bar, true);
                    return *last_active_;
                } catch (const ConvergenceError&) {
                }
            }
            width *= 0.1;
        }
    }
    throw ConvergenceError("power multiplier bisection did not converge", p,
                           std::numeric_limits<double>::quiet_NaN());
}

CapacitySolution solve_capacity(const MiEngine& engine, double e_bar, double tol)
{
    SolverOptions opts;
    opts.tol = tol;
    CapacitySolver solver(engine, opts);
    return solver.solve(e_bar);
}

std::vector<CapacityCurvePoint> capacity_curve(const MiEngine& engine, std::span<const double> energy_grid,
                                               double tol)
{
    SolverOptions opts;
    opts.tol = tol;
    CapacitySolver solver(engine, opts);
    std::vector<CapacityCurvePoint> curve;
    curve.reserve(energy_grid.size());
    for (std::size_t g = 0; g < energy_grid.size(); ++g) {
        try {
            const auto sol = solver.solve(energy_grid[g]);
            curve.push_back({energy_grid[g], sol.mi, sol.nu, sol.power_constraint_active});
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("grid index " + std::to_string(g) + ": " + e.what(), e.best_pmf(), e.residual());
        } catch (const Error& e) {
            throw Error(e.code(), "grid index " + std::to_string(g) + ": " + e.what());
        }
    }
    return curve;
}

bool curve_is_concave(std::span<const CapacityCurvePoint> curve, double slack)
{
    std::vector<CapacityCurvePoint> pts(curve.begin(), curve.end());
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].capacity < pts[i - 1].capacity - slack)
            return false;
        if (pts[i].nu > pts[i - 1].nu + slack)
            return false;
    }
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double h0 = pts[i].energy - pts[i - 1].energy;
        const double h1 = pts[i + 1].energy - pts[i].energy;
        if (h0 <= 0.0 || h1 <= 0.0)
            continue;
        const double s0 = (pts[i].capacity - pts[i - 1].capacity) / h0;
        const double s1 = (pts[i + 1].capacity - pts[i].capacity) / h1;
        if ((s1 - s0) * 0.5 * (h0 + h1) > slack)
            return false;
    }
    return true;
}

} // namespace pfshape
