// Exercises the shared library through its C header only.
#include "pfshape/pfshape.h"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

namespace {

struct Channel {
    pfs_constellation* c = nullptr;
    pfs_channel* ch = nullptr;
    Channel(int order, double max_energy)
    {
        REQUIRE(pfs_constellation_qam(order, max_energy, &c) == PFS_OK);
        const pfs_quadrature q = pfs_quadrature_default();
        REQUIRE(pfs_channel_create(c, 1.0, &q, &ch) == PFS_OK);
    }
    ~Channel()
    {
        pfs_channel_free(ch);
        pfs_constellation_free(c);
    }
};

} // namespace

TEST_CASE("version and status strings")
{
    CHECK(std::string(pfs_version()) == "0.1.0");
    CHECK(std::string(pfs_status_string(PFS_OK)).size() > 0);
    CHECK(std::string(pfs_status_string(PFS_ERR_INFEASIBLE)) != pfs_status_string(PFS_ERR_BUFFER));
    CHECK(std::string(pfs_status_string(static_cast<pfs_status>(999))).size() > 0);
}

TEST_CASE("constellation handles and error reporting")
{
    pfs_constellation* c = nullptr;
    CHECK(pfs_constellation_qam(12, 10.0, &c) == PFS_ERR_INVALID_ORDER);
    CHECK(c == nullptr);
    CHECK(std::string(pfs_last_error()).size() > 0);
    CHECK(pfs_constellation_qam(16, -1.0, &c) == PFS_ERR_INVALID_SCALE);
    CHECK(pfs_constellation_qam(16, 10.0, nullptr) == PFS_ERR_INVALID_ARGUMENT);
    CHECK(pfs_constellation_load("/nonexistent/points.json", &c) == PFS_ERR_IO);

    REQUIRE(pfs_constellation_qam(16, 18.0, &c) == PFS_OK);
    CHECK(std::string(pfs_last_error()).empty());
    CHECK(pfs_constellation_size(c) == 16);
    double re = 0.0;
    double im = 0.0;
    REQUIRE(pfs_constellation_point(c, 0, &re, &im) == PFS_OK);
    CHECK(re == doctest::Approx(-3.0));
    CHECK(im == doctest::Approx(3.0));
    CHECK(pfs_constellation_point(c, 16, &re, &im) != PFS_OK);

    // Buffer protocol: too small reports the needed size.
    size_t len = 0;
    std::vector<double> w(4);
    CHECK(pfs_constellation_energies(c, w.data(), w.size(), &len) == PFS_ERR_BUFFER);
    CHECK(len == 16);
    w.resize(len);
    REQUIRE(pfs_constellation_energies(c, w.data(), w.size(), &len) == PFS_OK);
    CHECK(w[0] == doctest::Approx(18.0));
    pfs_constellation_free(c);
    pfs_constellation_free(nullptr);

    const double xr[] = {0.0, 1.0};
    const double xi[] = {0.0, 0.0};
    REQUIRE(pfs_constellation_from_points(xr, xi, 2, &c) == PFS_OK);
    CHECK(pfs_constellation_size(c) == 2);
    pfs_constellation_free(c);
    const double dup[] = {1.0, 1.0};
    CHECK(pfs_constellation_from_points(dup, xi, 2, &c) == PFS_ERR_INVALID_INPUT);
}

TEST_CASE("last error is per thread")
{
    pfs_constellation* c = nullptr;
    CHECK(pfs_constellation_qam(3, 10.0, &c) != PFS_OK);
    std::string other = "unset";
    std::thread t([&] { other = pfs_last_error(); });
    t.join();
    CHECK(other.empty());
    CHECK_FALSE(std::string(pfs_last_error()).empty());
}

TEST_CASE("channel quantities")
{
    Channel k(16, 10.0);
    CHECK(pfs_channel_size(k.ch) == 16);
    std::vector<double> u(16, 1.0 / 16.0);
    double mi = 0.0;
    REQUIRE(pfs_mutual_information(k.ch, u.data(), u.size(), &mi) == PFS_OK);
    CHECK(mi > 0.0);
    CHECK(mi < std::log(16.0));
    std::vector<double> g(16);
    REQUIRE(pfs_gradient(k.ch, u.data(), u.size(), g.data()) == PFS_OK);
    double avg = 0.0;
    for (double v : g)
        avg += (v + 1.0) / 16.0;
    CHECK(avg == doctest::Approx(mi).epsilon(1e-12));
    double kl = -1.0;
    REQUIRE(pfs_output_kl(k.ch, u.data(), u.data(), 16, &kl) == PFS_OK);
    CHECK(kl == doctest::Approx(0.0).epsilon(1e-14));

    CHECK(pfs_mutual_information(k.ch, u.data(), 4, &mi) == PFS_ERR_INVALID_INPUT);
    u[0] = -0.1;
    CHECK(pfs_mutual_information(k.ch, u.data(), 16, &mi) == PFS_ERR_INVALID_INPUT);

    pfs_quadrature q = pfs_quadrature_default();
    CHECK(q.nodes_per_axis == 48);
    q.nodes_per_axis = 0;
    pfs_channel* bad = nullptr;
    CHECK(pfs_channel_create(k.c, 1.0, &q, &bad) != PFS_OK);
    q = pfs_quadrature_default();
    CHECK(pfs_channel_create(k.c, 0.0, &q, &bad) != PFS_OK);
}

TEST_CASE("solver, solution and curve")
{
    Channel k(64, 20.0);
    pfs_solver* s = nullptr;
    const pfs_solver_options o = pfs_solver_options_default();
    CHECK(o.tol == doctest::Approx(1e-7));
    REQUIRE(pfs_solver_create(k.ch, &o, &s) == PFS_OK);

    pfs_solution* sol = nullptr;
    CHECK(pfs_solve(s, 0.1, &sol) == PFS_ERR_INFEASIBLE);
    REQUIRE(pfs_solve(s, 5.2, &sol) == PFS_OK);
    pfs_solution_info info{};
    REQUIRE(pfs_solution_get_info(sol, &info) == PFS_OK);
    CHECK(info.power_constraint_active == 1);
    CHECK(info.energy == doctest::Approx(5.2).epsilon(1e-9));
    CHECK(info.kkt_residual <= 1e-7);
    CHECK(info.nu > 0.0);
    std::vector<double> p(64);
    size_t len = 0;
    REQUIRE(pfs_solution_pmf(sol, p.data(), p.size(), &len) == PFS_OK);
    CHECK(len == 64);

    pfs_slope_report sr{};
    REQUIRE(pfs_slope_consistency(s, sol, 0.05, &sr) == PFS_OK);
    CHECK(sr.defined == 1);
    CHECK(sr.relative_mismatch <= 0.05);

    pfs_prop1_report r{};
    REQUIRE(pfs_prop1(k.ch, p.data(), p.size(), sol, &r) == PFS_OK);
    CHECK(r.within_tolerance == 1);

    pfs_block* b = nullptr;
    int calls = 0;
    const auto cb = [](double, void* user) { ++*static_cast<int*>(user); };
    REQUIRE(pfs_design_block(k.ch, sol, 1, cb, &calls, &b) == PFS_OK);
    pfs_block_info bi{};
    REQUIRE(pfs_block_get_info(b, &bi) == PFS_OK);
    CHECK(bi.n == 1);
    CHECK(bi.joint_size == 64);
    CHECK(bi.per_symbol_energy == doctest::Approx(5.82).epsilon(0.01));
    std::vector<int> lens(64);
    REQUIRE(pfs_block_lengths(b, lens.data(), lens.size(), &len) == PFS_OK);
    CHECK(pfs_kraft_equality(lens.data(), lens.size()) == 1);
    pfs_block_free(b);
    CHECK(pfs_design_block(k.ch, sol, 5, nullptr, nullptr, &b) == PFS_ERR_BLOCK_TOO_LARGE);

    const double grid[] = {4.0, 5.2, 6.0};
    pfs_curve_point pts[3];
    size_t failed = 99;
    REQUIRE(pfs_capacity_curve(k.ch, grid, 3, 1e-7, pts, &failed) == PFS_OK);
    CHECK(pfs_curve_is_concave(pts, 3, 1e-9) == 1);
    CHECK(pts[1].capacity == doctest::Approx(info.mi).epsilon(1e-9));
    const double bad_grid[] = {4.0, 0.01};
    CHECK(pfs_capacity_curve(k.ch, bad_grid, 2, 1e-7, pts, &failed) == PFS_ERR_INFEASIBLE);
    CHECK(failed == 1);

    pfs_solution_free(sol);
    pfs_solver_free(s);
}

TEST_CASE("dyadic PMFs and prefix codes")
{
    const double p[] = {0.4, 0.3, 0.2, 0.1};
    pfs_dyadic* h = nullptr;
    REQUIRE(pfs_huffman(p, 4, &h) == PFS_OK);
    int lens[4];
    size_t len = 0;
    REQUIRE(pfs_dyadic_lengths(h, lens, 4, &len) == PFS_OK);
    CHECK(lens[0] == 1);
    CHECK(lens[3] == 3);
    pfs_dyadic_free(h);

    const double q[] = {0.9, 0.1, 0.0};
    pfs_dyadic* g = nullptr;
    REQUIRE(pfs_ghc(q, 3, &g) == PFS_OK);
    REQUIRE(pfs_dyadic_lengths(g, lens, 3, &len) == PFS_OK);
    CHECK(lens[0] == 0);
    CHECK(lens[1] == PFS_EXCLUDED);
    CHECK(lens[2] == PFS_EXCLUDED);
    pfs_dyadic_free(g);

    const int bad[] = {1, 2};
    pfs_dyadic* d = nullptr;
    CHECK(pfs_dyadic_from_lengths(bad, 2, &d) == PFS_ERR_NOT_FULL_CODE);
    const int full[] = {3, 1, 3, 2};
    REQUIRE(pfs_dyadic_from_lengths(full, 4, &d) == PFS_OK);
    double probs[4];
    REQUIRE(pfs_dyadic_probs(d, probs, 4, &len) == PFS_OK);
    CHECK(probs[1] == 0.5);
    double kl = 0.0;
    REQUIRE(pfs_kl(probs, p, 4, &kl) == PFS_OK);
    CHECK(kl > 0.0);

    pfs_code* code = nullptr;
    REQUIRE(pfs_code_create(d, &code) == PFS_OK);
    char buf[8];
    REQUIRE(pfs_code_word(code, 0, buf, sizeof buf, &len) == PFS_OK);
    CHECK(std::string(buf) == "110");
    CHECK(pfs_code_word(code, 0, buf, 3, &len) == PFS_ERR_BUFFER);
    CHECK(len == 3);

    const uint8_t bits[] = {1, 1, 0, 0, 1, 0, 1, 1, 1};
    size_t syms[8];
    REQUIRE(pfs_code_encode(code, bits, 9, syms, 8, &len) == PFS_OK);
    REQUIRE(len == 4);
    CHECK(syms[0] == 0);
    CHECK(syms[1] == 1);
    CHECK(syms[2] == 3);
    CHECK(syms[3] == 2);
    uint8_t back[16];
    size_t nb = 0;
    REQUIRE(pfs_code_decode(code, syms, len, back, sizeof back, &nb) == PFS_OK);
    CHECK(nb == 9);
    CHECK(std::memcmp(back, bits, 9) == 0);
    const size_t wrong[] = {7};
    CHECK(pfs_code_decode(code, wrong, 1, back, sizeof back, &nb) == PFS_ERR_INVALID_SYMBOL);
    pfs_code_free(code);
    pfs_dyadic_free(d);
}

TEST_CASE("sampled-Gaussian baseline")
{
    Channel k(64, 10.0);
    std::vector<double> sg(64);
    REQUIRE(pfs_sg_pmf(k.c, 0.0, sg.data(), sg.size()) == PFS_OK);
    CHECK(sg[7] == doctest::Approx(1.0 / 64.0));
    double lam = 0.0;
    REQUIRE(pfs_sg_lambda(k.c, 3.0, &lam) == PFS_OK);
    CHECK(lam > 0.0);
    CHECK(pfs_sg_lambda(k.c, 10.5, &lam) == PFS_ERR_INFEASIBLE);
    std::vector<double> w(64);
    size_t len = 0;
    REQUIRE(pfs_constellation_energies(k.c, w.data(), w.size(), &len) == PFS_OK);
    REQUIRE(pfs_sg_pmf(k.c, 0.4, sg.data(), sg.size()) == PFS_OK);
    CHECK(pfs_is_monotone_in_energy(sg.data(), w.data(), 64, 1e-12) == 1);

    const double grid[] = {3.0, 5.0};
    pfs_sg_point pts[2];
    REQUIRE(pfs_sg_curve(k.ch, grid, 2, pts) == PFS_OK);
    CHECK(pts[0].energy == 3.0);
    pfs_operating_point op{};
    REQUIRE(pfs_huffman_shaping_point(k.ch, 0.0, &op) == PFS_OK);
    CHECK(op.mi > 0.0);
    CHECK(pfs_relative_error(5.82, 5.20) == doctest::Approx(0.10653).epsilon(1e-4));
}
