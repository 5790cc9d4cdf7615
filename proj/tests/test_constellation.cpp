#include "pfshape/constellation.hpp"
#include "pfshape/error.hpp"
#include "pfshape/quadrature.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace pfshape;

namespace {

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("64-QAM energies span 20/49 to 20")
{
    const auto c = make_square_qam(64, 20.0);
    REQUIRE(c.size() == 64);
    const auto e = c.energies();
    CHECK(*std::max_element(e.begin(), e.end()) == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(*std::min_element(e.begin(), e.end()) == doctest::Approx(20.0 / 49.0).epsilon(1e-14));
    for (std::size_t i = 0; i < c.size(); ++i)
        CHECK(e[i] == doctest::Approx(std::norm(c.point(i))).epsilon(1e-15));

    const auto r = feasible_energy_range(c);
    CHECK(r.min_energy == doctest::Approx(20.0 / 49.0));
    CHECK(r.max_energy == doctest::Approx(20.0));
}

TEST_CASE("QAM layout: row-major, top row first, real part increasing")
{
    const auto c = make_square_qam(16, 18.0);  // corner (3,3)*d/2 with 2*(3d/2)^2 = 18 -> d = 2
    CHECK(c.point(0) == Complex(-3.0, 3.0));
    CHECK(c.point(3) == Complex(3.0, 3.0));
    CHECK(c.point(12) == Complex(-3.0, -3.0));
    CHECK(c.point(5).real() == doctest::Approx(-1.0));
    CHECK(c.point(5).imag() == doctest::Approx(1.0));
}

TEST_CASE("QPSK has constant energy")
{
    const auto c = make_square_qam(4, 2.0);
    for (double e : c.energies())
        CHECK(e == doctest::Approx(2.0));
    const auto r = feasible_energy_range(c);
    CHECK(r.min_energy == doctest::Approx(2.0));
    CHECK(r.max_energy == doctest::Approx(2.0));
}

TEST_CASE("QAM argument errors")
{
    CHECK(code_of([] { make_square_qam(8, 10.0); }) == ErrorCode::InvalidOrder);
    CHECK(code_of([] { make_square_qam(1, 10.0); }) == ErrorCode::InvalidOrder);
    CHECK(code_of([] { make_square_qam(0, 10.0); }) == ErrorCode::InvalidOrder);
    CHECK(code_of([] { make_square_qam(16, 0.0); }) == ErrorCode::InvalidScale);
    CHECK(code_of([] { make_square_qam(16, -1.0); }) == ErrorCode::InvalidScale);
    CHECK(code_of([] { make_square_qam(16, std::nan("")); }) == ErrorCode::InvalidScale);
}

TEST_CASE("Constellation validation and range")
{
    const Constellation two(std::vector<Complex>{{0.0, 0.0}, {1.0, 0.0}});
    const auto r = feasible_energy_range(two);
    CHECK(r.min_energy == 0.0);
    CHECK(r.max_energy == 1.0);

    CHECK(code_of([] { Constellation(std::vector<Complex>{{1.0, 0.0}, {1.0, 0.0}}); }) == ErrorCode::InvalidInput);
    CHECK(code_of([] { Constellation(std::vector<Complex>{{INFINITY, 0.0}}); }) == ErrorCode::InvalidInput);
    CHECK(code_of([] { Constellation(std::vector<Complex>{}); }) == ErrorCode::InvalidInput);

    const auto s = two.scaled(2.0);
    CHECK(s.energy(1) == doctest::Approx(4.0));
    CHECK(code_of([&] { two.scaled(0.0); }) == ErrorCode::InvalidScale);
}

TEST_CASE("JSON constellation parsing")
{
    const auto c = parse_constellation_json(R"({"points": [[0, 0], [1, -1], [2.5, 0]], "label": "toy"})");
    CHECK(c.size() == 3);
    CHECK(c.label() == "toy");
    CHECK(c.point(1) == Complex(1.0, -1.0));
    CHECK(c.energy(2) == doctest::Approx(6.25));

    CHECK(code_of([] { parse_constellation_json("{"); }) == ErrorCode::InvalidInput);
    CHECK(code_of([] { parse_constellation_json(R"({"pts": []})"); }) == ErrorCode::InvalidInput);
    CHECK(code_of([] { parse_constellation_json(R"({"points": [[1]]})"); }) == ErrorCode::InvalidInput);
    CHECK(code_of([] { parse_constellation_json(R"({"points": [[0,0],[0,0]]})"); }) == ErrorCode::InvalidInput);

    const auto path = std::filesystem::temp_directory_path() / "pfshape_test_constellation.json";
    {
        std::ofstream f(path);
        f << R"({"points": [[-1, 0], [1, 0]]})";
    }
    CHECK(load_constellation(path).size() == 2);
    std::filesystem::remove(path);
    CHECK(code_of([&] { load_constellation(path); }) == ErrorCode::Io);
}

TEST_CASE("Gauss-Hermite rule integrates polynomials against exp(-t^2)")
{
    for (int n : {1, 2, 5, 20, 48, 64}) {
        const auto rule = gauss_hermite(n);
        REQUIRE(rule.nodes.size() == static_cast<std::size_t>(n));
        CHECK(std::is_sorted(rule.nodes.begin(), rule.nodes.end()));
        double m0 = 0.0;
        double m2 = 0.0;
        double m4 = 0.0;
        for (int k = 0; k < n; ++k) {
            const double t = rule.nodes[static_cast<std::size_t>(k)];
            const double w = rule.weights[static_cast<std::size_t>(k)];
            m0 += w;
            m2 += w * t * t;
            m4 += w * t * t * t * t;
        }
        const double sp = std::sqrt(std::numbers::pi);
        CHECK(m0 == doctest::Approx(sp).epsilon(1e-13));
        if (n >= 2)
            CHECK(m2 == doctest::Approx(sp / 2.0).epsilon(1e-12));
        if (n >= 3)
            CHECK(m4 == doctest::Approx(3.0 * sp / 4.0).epsilon(1e-12));
    }
    // Known two-point rule: nodes +-1/sqrt(2), weights sqrt(pi)/2.
    const auto r2 = gauss_hermite(2);
    CHECK(r2.nodes[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(r2.weights[0] == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-14));
    CHECK(code_of([] { gauss_hermite(0); }) == ErrorCode::InvalidArgument);
}
