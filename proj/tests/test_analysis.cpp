#include "pfshape/analysis.hpp"
#include "pfshape/constellation.hpp"
#include "pfshape/error.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace pfshape;

TEST_CASE("relative error convention")
{
    CHECK(relative_error(5.82, 5.20) == doctest::Approx(0.10653).epsilon(1e-4));
    CHECK(relative_error(1.90, 1.81) == doctest::Approx(0.04737).epsilon(1e-3));
    CHECK(relative_error(2.0, 2.0) == 0.0);
    CHECK(relative_error(0.0, 0.0) == 0.0);
}

TEST_CASE("operating points")
{
    const MiEngine e(make_square_qam(64, 20.0), {});
    const auto w = e.constellation().energies();
    std::vector<double> p(64, 0.0);
    const auto imin = static_cast<std::size_t>(std::min_element(w.begin(), w.end()) - w.begin());
    p[imin] = 1.0;
    const auto op = operating_point(e, p, "corner");
    CHECK(op.energy == doctest::Approx(20.0 / 49.0));
    CHECK(op.mi == 0.0);
    CHECK(op.label == "corner");

    // Uniform: energy is the exact mean; MI cross-checked by Monte Carlo.
    const std::vector<double> u(64, 1.0 / 64.0);
    const auto uo = operating_point(e, u);
    CHECK(uo.energy == doctest::Approx(std::accumulate(w.begin(), w.end(), 0.0) / 64.0).epsilon(1e-14));
    QuadratureSpec mc;
    mc.scheme = QuadratureScheme::MonteCarlo;
    mc.mc_samples = 200'000;
    const MiEngine emc(make_square_qam(64, 20.0), {}, mc);
    const auto est = emc.block_mutual_information(u, 1);
    CHECK(std::abs(est.value - uo.mi) <= 4.0 * est.std_error);

    CHECK_THROWS_AS(operating_point(e, std::vector<double>{1.0}), Error);
}

TEST_CASE("identity residual at the design point")
{
    const MiEngine e(make_square_qam(64, 20.0), {});
    CapacitySolver solver(e);
    const auto sol = solver.solve(5.2);
    const CheckedEngine ce(e);

    const auto same = prop1_residual(ce, sol.pmf, sol);
    CHECK(std::abs(same.residual) <= same.tolerance);
    CHECK(same.output_kl == doctest::Approx(0.0).epsilon(1e-12));

    const auto g = ghc(sol.pmf).probs();
    const auto r = prop1_residual(ce, g, sol);
    CHECK(r.support_condition);
    CHECK(r.within_tolerance);
    CHECK(std::abs(r.residual) < 1e-3);
    CHECK(r.output_kl > 0.0);
    CHECK(r.e_tilde == doctest::Approx(5.82).epsilon(0.01));

    std::mt19937_64 rng(17);
    for (int k = 0; k < 10; ++k) {
        auto p = pfshape::test::random_pmf(64, rng, 0.0);
        double s = 0.0;
        for (std::size_t i = 0; i < 64; ++i) {
            if (sol.pmf[i] == 0.0)
                p[i] = 0.0;
            s += p[i];
        }
        for (auto& v : p)
            v /= s;
        const auto rr = prop1_residual(ce, p, sol);
        CHECK(rr.within_tolerance);
    }
}

TEST_CASE("mass off the support makes the identity one-sided")
{
    const MiEngine e(make_square_qam(64, 10.0), {});
    CapacitySolver solver(e);
    const auto sol = solver.solve(5.0);
    std::size_t off = 64;
    for (std::size_t i = 0; i < 64; ++i)
        if (sol.pmf[i] == 0.0)
            off = i;
    REQUIRE(off < 64);
    auto p = sol.pmf;
    for (auto& v : p)
        v *= 0.9;
    p[off] += 0.1;
    const auto r = prop1_residual(CheckedEngine(e), p, sol);
    CHECK_FALSE(r.support_condition);
    CHECK(r.residual <= r.tolerance);
    CHECK(r.within_tolerance);
    CHECK(r.residual < -1e-4);
}

TEST_CASE("slope of C(E) matches the power multiplier")
{
    const MiEngine e(make_square_qam(64, 20.0), {});
    CapacitySolver solver(e);
    const auto sol = solver.solve(5.2);
    const auto s = slope_consistency(solver, sol, 0.05);
    CHECK(s.defined);
    CHECK(s.constraint_active);
    CHECK(s.relative_mismatch <= 0.05);

    const auto plateau = solver.solve(15.0);
    const auto flat = slope_consistency(solver, plateau, 0.05);
    CHECK_FALSE(flat.defined);
    CHECK(flat.nu == 0.0);
    // E* sits at the kink, so the one-sided drop below it leaves a small slope.
    CHECK(flat.relative_mismatch == doctest::Approx(std::abs(flat.central_difference)));
    CHECK(flat.relative_mismatch < 1e-3);

    const MiEngine toy(Constellation(std::vector<Complex>{{0.0, 0.0}, {1.0, 0.0}, {0.0, 2.0}}), {});
    CapacitySolver ts(toy);
    const auto tsol = ts.solve(0.8);
    REQUIRE(tsol.power_constraint_active);
    CHECK(slope_consistency(ts, tsol, 0.05).relative_mismatch <= 0.05);

    CHECK_THROWS_AS(slope_consistency(solver, sol, 0.0), Error);
    CHECK_THROWS_AS(slope_consistency(solver, sol, 10.0), Error);
}

TEST_CASE("block identity for two uses")
{
    QuadratureSpec q;
    q.mc_samples = 20'000;
    const MiEngine e(make_square_qam(16, 10.0), {}, q);
    const auto sol = solve_capacity(e, 3.0);
    const auto d = design_block(e, sol, 2);
    const auto r = block_prop1_residual(e, sol, d);
    CHECK(r.support_condition);
    CHECK(r.within_tolerance);
    CHECK(r.tolerance > 0.0);
}
