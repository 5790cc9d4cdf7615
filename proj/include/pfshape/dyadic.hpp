#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pfshape {

/// PMF whose nonzero entries are 2^-l_i, stored as integer codeword lengths.
/// Excluded symbols carry kExcluded. The included lengths always satisfy the
/// Kraft equality exactly (a full binary code tree).
class DyadicPmf {
public:
    static constexpr int kExcluded = -1;

    /// Throws Error(NotFullCode) when the Kraft sum differs from 1.
    explicit DyadicPmf(std::vector<int> lengths);

    std::size_t size() const noexcept { return lengths_.size(); }
    std::span<const int> lengths() const noexcept { return lengths_; }
    int length(std::size_t i) const { return lengths_.at(i); }
    bool included(std::size_t i) const { return lengths_.at(i) != kExcluded; }
    double prob(std::size_t i) const;
    std::vector<double> probs() const;
    int max_length() const noexcept;

    friend bool operator==(const DyadicPmf&, const DyadicPmf&) = default;

private:
    std::vector<int> lengths_;
};

/// Exact test of sum_i 2^-l_i == 1 over the included lengths (no floating point).
bool satisfies_kraft_equality(std::span<const int> lengths);

/// KL divergence D(d || p) in nats with 0 ln 0 = 0; +inf when d puts mass
/// where p has none. Terms are summed in sorted order, so permuting symbols
/// with equal (d_i, p_i) pairs gives a bit-identical result.
double kl_pmf(std::span<const double> d, std::span<const double> p);
double kl_pmf(const DyadicPmf& d, std::span<const double> p);

/// Dyadic PMF minimizing D(d || p) (Geometric Huffman Coding). Repeatedly
/// takes the two smallest weights a >= b: if 4b <= a the smaller node is
/// discarded, otherwise both merge into a node of weight 2 sqrt(ab).
/// Zero-probability symbols are always excluded.
DyadicPmf ghc(std::span<const double> p);

/// Exhaustive search over all length assignments with lengths <= max_len
/// (plus exclusion) satisfying the Kraft equality. m <= 8, max_len <= 10.
/// Ties go to the lexicographically smallest length vector, exclusion
/// ordered after every length.
DyadicPmf ghc_bruteforce(std::span<const double> p, int max_len);

/// Classical Huffman code lengths (minimum expected length). Every symbol is
/// included; merge ties go to the subtree holding the lowest symbol index.
DyadicPmf huffman_lengths(std::span<const double> p);

/// Canonical full prefix-free code over the included symbols of a dyadic PMF:
/// symbols ordered by (length, index) receive successive binary counter
/// values, left-justified to their length.
class PrefixCode {
public:
    explicit PrefixCode(const DyadicPmf& dyadic);

    std::size_t size() const noexcept { return codewords_.size(); }
    const DyadicPmf& dyadic() const noexcept { return dyadic_; }
    /// Throws Error(InvalidSymbol) for excluded or out-of-range symbols.
    const std::string& codeword(std::size_t symbol) const;

    /// Parses bits (each 0 or 1) into symbols by walking the code tree. A
    /// trailing partial word is discarded.
    std::vector<std::size_t> encode(std::span<const std::uint8_t> bits) const;
    std::vector<std::uint8_t> decode(std::span<const std::size_t> symbols) const;

    /// Incremental parser over a bit stream.
    class Parser {
    public:
        explicit Parser(const PrefixCode& code) : code_(&code) {}
        /// Consumes one bit; returns the symbol when a word completes.
        std::optional<std::size_t> push(std::uint8_t bit);
        bool at_word_boundary() const noexcept { return node_ == 0; }

    private:
        const PrefixCode* code_;
        std::size_t node_ = 0;
    };

private:
    struct Node {
        std::int64_t child[2] = {-1, -1};
        std::int64_t symbol = -1;
    };

    DyadicPmf dyadic_;
    std::vector<std::string> codewords_;
    std::vector<Node> trie_;
};

/// Validates lengths (Kraft equality) and builds the canonical code.
PrefixCode build_prefix_code(std::span<const int> lengths);

} // namespace pfshape
