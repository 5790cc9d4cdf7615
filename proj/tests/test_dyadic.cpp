#include "pfshape/dyadic.hpp"
#include "pfshape/error.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace pfshape;

namespace {

constexpr int X = DyadicPmf::kExcluded;

std::vector<int> lengths_of(const DyadicPmf& d) { return {d.lengths().begin(), d.lengths().end()}; }

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

TEST_CASE("Kraft equality is exact")
{
    CHECK(satisfies_kraft_equality(std::vector<int>{1, 2, 2}));
    CHECK(satisfies_kraft_equality(std::vector<int>{2, 2, 2, 2}));
    CHECK(satisfies_kraft_equality(std::vector<int>{1, X, 1}));
    CHECK(satisfies_kraft_equality(std::vector<int>{0}));
    CHECK(satisfies_kraft_equality(std::vector<int>{0, X}));
    CHECK_FALSE(satisfies_kraft_equality(std::vector<int>{1, 2}));
    CHECK_FALSE(satisfies_kraft_equality(std::vector<int>{1, 1, 1}));
    CHECK_FALSE(satisfies_kraft_equality(std::vector<int>{X, X}));
    CHECK_FALSE(satisfies_kraft_equality(std::vector<int>{0, 1}));
    CHECK_FALSE(satisfies_kraft_equality(std::vector<int>{-3, 1}));
    CHECK_FALSE(satisfies_kraft_equality(std::vector<int>{1, 1000000000}));
    // 1 + 1/2 + ... + 2^-59 + 2^-59 sums to one only in exact arithmetic.
    std::vector<int> deep;
    for (int l = 1; l <= 59; ++l)
        deep.push_back(l);
    deep.push_back(59);
    CHECK(satisfies_kraft_equality(deep));
    deep.back() = 60;
    CHECK_FALSE(satisfies_kraft_equality(deep));
}

TEST_CASE("DyadicPmf construction")
{
    const DyadicPmf d(std::vector<int>{1, 2, 2});
    CHECK(d.prob(0) == 0.5);
    CHECK(d.prob(2) == 0.25);
    CHECK(d.max_length() == 2);
    CHECK(code_of([] { DyadicPmf(std::vector<int>{1, 2}); }) == ErrorCode::NotFullCode);
}

TEST_CASE("KL divergence between PMFs")
{
    const std::vector<double> p{0.9, 0.1};
    CHECK(kl_pmf(p, p) == 0.0);
    CHECK(kl_pmf(std::vector<double>{1.0, 0.0}, p) == doctest::Approx(std::log(10.0 / 9.0)).epsilon(1e-14));
    CHECK(kl_pmf(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 0.0}) ==
          std::numeric_limits<double>::infinity());
    CHECK(code_of([] { kl_pmf(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}); }) ==
          ErrorCode::InvalidInput);
    // Summation order does not depend on symbol order.
    const std::vector<double> d1{0.5, 0.25, 0.125, 0.125};
    const std::vector<double> p1{0.4, 0.3, 0.2, 0.1};
    const std::vector<double> d2{0.125, 0.125, 0.25, 0.5};
    const std::vector<double> p2{0.1, 0.2, 0.3, 0.4};
    CHECK(kl_pmf(d1, p1) == kl_pmf(d2, p2));
}

TEST_CASE("GHC examples")
{
    CHECK(lengths_of(ghc(std::vector<double>{0.5, 0.25, 0.25})) == std::vector<int>{1, 2, 2});
    CHECK(kl_pmf(ghc(std::vector<double>{0.5, 0.25, 0.25}), std::vector<double>{0.5, 0.25, 0.25}) == 0.0);

    const std::vector<double> skew{0.9, 0.1};
    const auto g = ghc(skew);
    CHECK(lengths_of(g) == std::vector<int>{0, X});
    CHECK(kl_pmf(g, skew) == doctest::Approx(std::log(1.0 / 0.9)).epsilon(1e-14));
    // Beats the uniform dyadic PMF.
    CHECK(kl_pmf(g, skew) < kl_pmf(std::vector<double>{0.5, 0.5}, skew));

    // Zero-probability symbols are excluded.
    const auto z = ghc(std::vector<double>{0.5, 0.0, 0.5});
    CHECK(lengths_of(z) == std::vector<int>{1, X, 1});

    CHECK(code_of([] { ghc(std::vector<double>{0.5, 0.6}); }) == ErrorCode::InvalidInput);
}

TEST_CASE("GHC of any dyadic input is the identity")
{
    const std::vector<std::vector<int>> cases{{1, 2, 3, 3}, {2, 2, 2, 2}, {3, 1, 3, 2}, {1, X, 2, 2}};
    for (const auto& l : cases) {
        const DyadicPmf d(l);
        CHECK(lengths_of(ghc(d.probs())) == l);
    }
}

TEST_CASE("GHC equals exhaustive search")
{
    const std::vector<double> p{0.4, 0.3, 0.2, 0.1};
    CHECK(kl_pmf(ghc(p), p) == kl_pmf(ghc_bruteforce(p, 10), p));
    CHECK(lengths_of(ghc_bruteforce(std::vector<double>{0.9, 0.1}, 8)) == std::vector<int>{0, X});

    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> msize(2, 6);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = static_cast<std::size_t>(msize(rng));
        const auto q = pfshape::test::random_pmf(m, rng, 0.0);
        const auto g = ghc(q);
        const auto b = ghc_bruteforce(q, 10);
        CHECK(satisfies_kraft_equality(g.lengths()));
        CHECK(kl_pmf(g, q) == doctest::Approx(kl_pmf(b, q)).epsilon(1e-12));
    }
}

TEST_CASE("exhaustive search limits")
{
    CHECK(code_of([] { ghc_bruteforce(std::vector<double>(9, 1.0 / 9.0), 5); }) == ErrorCode::SearchSpaceTooLarge);
    CHECK(code_of([] { ghc_bruteforce(std::vector<double>{0.5, 0.5}, 11); }) == ErrorCode::SearchSpaceTooLarge);
}

TEST_CASE("Huffman lengths")
{
    CHECK(lengths_of(huffman_lengths(std::vector<double>{0.5, 0.25, 0.25})) == std::vector<int>{1, 2, 2});
    CHECK(lengths_of(huffman_lengths(std::vector<double>{0.9, 0.1})) == std::vector<int>{1, 1});
    const std::vector<double> p{0.4, 0.3, 0.2, 0.1};
    const auto h = huffman_lengths(p);
    CHECK(lengths_of(h) == std::vector<int>{1, 2, 3, 3});
    double avg = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        avg += p[i] * h.length(i);
    CHECK(avg == doctest::Approx(1.9));
    // lambda = 0 on a power-of-two alphabet: uniform, all lengths k.
    const auto u = huffman_lengths(std::vector<double>(64, 1.0 / 64.0));
    for (int l : u.lengths())
        CHECK(l == 6);
    CHECK(lengths_of(huffman_lengths(std::vector<double>{1.0})) == std::vector<int>{0});
}

TEST_CASE("canonical prefix codes")
{
    const auto c1 = build_prefix_code(std::vector<int>{1, 2, 2});
    CHECK(c1.codeword(0) == "0");
    CHECK(c1.codeword(1) == "10");
    CHECK(c1.codeword(2) == "11");
    const auto c2 = build_prefix_code(std::vector<int>{2, 2, 2, 2});
    CHECK(c2.codeword(0) == "00");
    CHECK(c2.codeword(3) == "11");
    const auto c3 = build_prefix_code(std::vector<int>{1, 2, 3, 3});
    CHECK(c3.codeword(2) == "110");
    CHECK(c3.codeword(3) == "111");
    // Order among equal lengths follows the symbol index.
    const auto c4 = build_prefix_code(std::vector<int>{3, 1, 3, 2});
    CHECK(c4.codeword(1) == "0");
    CHECK(c4.codeword(3) == "10");
    CHECK(c4.codeword(0) == "110");
    CHECK(c4.codeword(2) == "111");

    const auto cx = build_prefix_code(std::vector<int>{1, X, 1});
    CHECK(code_of([&] { cx.codeword(1); }) == ErrorCode::InvalidSymbol);
    CHECK(code_of([&] { cx.codeword(7); }) == ErrorCode::InvalidSymbol);
    CHECK(code_of([] { build_prefix_code(std::vector<int>{1, 1, 1}); }) == ErrorCode::NotFullCode);
}

TEST_CASE("encode and decode")
{
    const auto c = build_prefix_code(std::vector<int>{1, 2, 2});
    const std::vector<std::uint8_t> bits{0, 1, 0, 1, 1, 0};
    CHECK(c.encode(bits) == std::vector<std::size_t>{0, 1, 2, 0});
    CHECK(c.decode(std::vector<std::size_t>{0, 1, 2, 0}) == bits);
    CHECK(c.encode(std::vector<std::uint8_t>{}).empty());
    // Trailing partial word is dropped.
    CHECK(c.encode(std::vector<std::uint8_t>{0, 1}) == std::vector<std::size_t>{0});
    CHECK(code_of([&] { c.encode(std::vector<std::uint8_t>{2}); }) == ErrorCode::InvalidInput);
    CHECK(code_of([&] { c.decode(std::vector<std::size_t>{3}); }) == ErrorCode::InvalidSymbol);

    const auto single = build_prefix_code(std::vector<int>{0, X});
    CHECK(single.codeword(0).empty());
    CHECK(code_of([&] { single.encode(std::vector<std::uint8_t>{0}); }) == ErrorCode::InvalidInput);

    PrefixCode::Parser parser(c);
    CHECK(parser.at_word_boundary());
    CHECK(!parser.push(1).has_value());
    CHECK(!parser.at_word_boundary());
    CHECK(parser.push(1).value() == 2);
}

TEST_CASE("parsing fair bits induces the dyadic PMF")
{
    const std::vector<int> lengths{1, 2, 3, 3};
    const auto code = build_prefix_code(lengths);
    std::mt19937_64 rng(99);
    std::vector<std::uint8_t> bits(1'000'000);
    for (auto& b : bits)
        b = static_cast<std::uint8_t>(rng() & 1u);
    const auto symbols = code.encode(bits);
    std::vector<double> count(4, 0.0);
    for (auto s : symbols)
        count[s] += 1.0;
    const auto n = static_cast<double>(symbols.size());
    for (std::size_t i = 0; i < 4; ++i) {
        const double pi = std::ldexp(1.0, -lengths[i]);
        const double sd = std::sqrt(n * pi * (1.0 - pi));
        CHECK(std::abs(count[i] - n * pi) <= 3.0 * sd);
    }
    // Round trip up to the dropped partial word.
    const auto back = code.decode(symbols);
    REQUIRE(back.size() <= bits.size());
    CHECK(bits.size() - back.size() < 3);
    CHECK(std::equal(back.begin(), back.end(), bits.begin()));
}
