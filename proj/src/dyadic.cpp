#include "pfshape/dyadic.hpp"

#include "pfshape/error.hpp"
#include "pfshape/pmf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>

namespace pfshape {

bool satisfies_kraft_equality(std::span<const int> lengths)
{
    // Count words per length, then carry pairs of siblings upwards. A full
    // tree leaves exactly one node at depth 0.
    std::map<int, std::uint64_t> count;
    for (int l : lengths) {
        if (l == DyadicPmf::kExcluded)
            continue;
        // A full code over m words has no word longer than m - 1.
        if (l < 0 || static_cast<std::size_t>(l) >= lengths.size())
            return false;
        ++count[l];
    }
    if (count.empty())
        return false;
    for (int depth = count.rbegin()->first; depth > 0; --depth) {
        const auto it = count.find(depth);
        if (it == count.end())
            continue;
        if (it->second % 2 != 0)
            return false;
        count[depth - 1] += it->second / 2;
    }
    return count[0] == 1;
}

DyadicPmf::DyadicPmf(std::vector<int> lengths) : lengths_(std::move(lengths))
{
    if (!satisfies_kraft_equality(lengths_))
        throw Error(ErrorCode::NotFullCode, "codeword lengths violate the Kraft equality");
}

double DyadicPmf::prob(std::size_t i) const
{
    const int l = lengths_.at(i);
    return l == kExcluded ? 0.0 : std::ldexp(1.0, -l);
}

std::vector<double> DyadicPmf::probs() const
{
    std::vector<double> out(lengths_.size());
    for (std::size_t i = 0; i < lengths_.size(); ++i)
        out[i] = prob(i);
    return out;
}

int DyadicPmf::max_length() const noexcept
{
    int best = 0;
    for (int l : lengths_)
        best = std::max(best, l);
    return best;
}

double kl_pmf(std::span<const double> d, std::span<const double> p)
{
    if (d.size() != p.size())
        throw Error(ErrorCode::InvalidInput, "KL arguments differ in size");
    std::vector<double> terms;
    terms.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] <= 0.0)
            continue;
        if (p[i] <= 0.0)
            return std::numeric_limits<double>::infinity();
        terms.push_back(d[i] * std::log(d[i] / p[i]));
    }
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms)
        sum += t;
    return sum;
}

double kl_pmf(const DyadicPmf& d, std::span<const double> p)
{
    return kl_pmf(d.probs(), p);
}

DyadicPmf ghc(std::span<const double> p)
{
    validate_pmf(p);
    const std::size_t m = p.size();

    struct Node {
        double weight;
        std::int64_t left;
        std::int64_t right;
        std::int64_t symbol;
    };
    std::vector<Node> nodes;
    nodes.reserve(2 * m);

    // Leaves ascending by weight; among equal weights the higher index counts
    // as smaller, i.e. ties resolve in favour of lower indices.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < m; ++i)
        if (p[i] > 0.0)
            order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p[a] < p[b] || (p[a] == p[b] && a > b);
    });

    std::deque<std::int64_t> leaves;
    for (std::size_t i : order) {
        leaves.push_back(static_cast<std::int64_t>(nodes.size()));
        nodes.push_back({p[i], -1, -1, static_cast<std::int64_t>(i)});
    }
    // Merged weights are produced in nondecreasing order, so a FIFO suffices.
    std::deque<std::int64_t> merged;

    auto pop_smallest = [&](bool& from_merged) {
        from_merged = !merged.empty() &&
                      (leaves.empty() || nodes[static_cast<std::size_t>(merged.front())].weight <=
                                             nodes[static_cast<std::size_t>(leaves.front())].weight);
        auto& q = from_merged ? merged : leaves;
        const std::int64_t id = q.front();
        q.pop_front();
        return id;
    };

    while (leaves.size() + merged.size() > 1) {
        bool small_merged = false;
        bool next_merged = false;
        const std::int64_t small = pop_smallest(small_merged);
        const std::int64_t next = pop_smallest(next_merged);
        const double b = nodes[static_cast<std::size_t>(small)].weight;
        const double a = nodes[static_cast<std::size_t>(next)].weight;
        if (4.0 * b <= a) {
            // Drop the smaller subtree; the larger node goes back where it was.
            (next_merged ? merged : leaves).push_front(next);
        } else {
            const double w = 2.0 * std::sqrt(a) * std::sqrt(b);
            merged.push_back(static_cast<std::int64_t>(nodes.size()));
            nodes.push_back({w, next, small, -1});
        }
    }

    std::vector<int> lengths(m, DyadicPmf::kExcluded);
    const std::int64_t root = leaves.empty() ? merged.front() : leaves.front();
    std::vector<std::pair<std::int64_t, int>> stack{{root, 0}};
    while (!stack.empty()) {
        const auto [id, depth] = stack.back();
        stack.pop_back();
        const Node& node = nodes[static_cast<std::size_t>(id)];
        if (node.symbol >= 0) {
            lengths[static_cast<std::size_t>(node.symbol)] = depth;
        } else {
            stack.emplace_back(node.left, depth + 1);
            stack.emplace_back(node.right, depth + 1);
        }
    }
    return DyadicPmf(std::move(lengths));
}

DyadicPmf ghc_bruteforce(std::span<const double> p, int max_len)
{
    if (p.size() > 8 || max_len > 10)
        throw Error(ErrorCode::SearchSpaceTooLarge, "exhaustive dyadic search limited to m <= 8, max_len <= 10");
    if (max_len < 0)
        throw Error(ErrorCode::InvalidArgument, "max_len must be nonnegative");
    validate_pmf(p);
    const std::size_t m = p.size();
    const std::uint32_t full = std::uint32_t{1} << max_len;

    std::vector<int> current(m, DyadicPmf::kExcluded);
    std::vector<int> best;
    double best_kl = std::numeric_limits<double>::infinity();
    std::vector<double> probs(m);

    // Depth-first in lexicographic order (lengths ascending, exclusion last),
    // so the first minimizer found wins ties.
    auto search = [&](auto&& self, std::size_t i, std::uint32_t remaining) -> void {
        const auto left = static_cast<int>(m - i);
        if (std::popcount(remaining) > left)
            return;
        if (i == m) {
            if (remaining != 0)
                return;
            for (std::size_t j = 0; j < m; ++j)
                probs[j] = current[j] == DyadicPmf::kExcluded ? 0.0 : std::ldexp(1.0, -current[j]);
            const double kl = kl_pmf(probs, p);
            if (kl < best_kl) {
                best_kl = kl;
                best = current;
            }
            return;
        }
        if (p[i] > 0.0) {
            for (int l = 0; l <= max_len; ++l) {
                const std::uint32_t mass = full >> l;
                if (mass > remaining)
                    continue;
                current[i] = l;
                self(self, i + 1, remaining - mass);
            }
        }
        current[i] = DyadicPmf::kExcluded;
        self(self, i + 1, remaining);
    };
    search(search, 0, full);
    return DyadicPmf(std::move(best));
}

DyadicPmf huffman_lengths(std::span<const double> p)
{
    validate_pmf(p);
    const std::size_t m = p.size();
    if (m == 1)
        return DyadicPmf(std::vector<int>{0});

    // (weight, lowest symbol index in subtree, node id); smallest on top.
    using Entry = std::tuple<double, std::size_t, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::vector<std::vector<std::size_t>> members(m);
    for (std::size_t i = 0; i < m; ++i) {
        heap.emplace(p[i], i, i);
        members[i] = {i};
    }
    std::vector<int> lengths(m, 0);
    while (heap.size() > 1) {
        const auto [wa, ia, na] = heap.top();
        heap.pop();
        const auto [wb, ib, nb] = heap.top();
        heap.pop();
        std::vector<std::size_t> joined = std::move(members[na]);
        joined.insert(joined.end(), members[nb].begin(), members[nb].end());
        members[nb].clear();
        for (std::size_t s : joined)
            ++lengths[s];
        const std::size_t id = members.size();
        members.push_back(std::move(joined));
        heap.emplace(wa + wb, std::min(ia, ib), id);
    }
    return DyadicPmf(std::move(lengths));
}

PrefixCode::PrefixCode(const DyadicPmf& dyadic) : dyadic_(dyadic), codewords_(dyadic.size())
{
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dyadic.size(); ++i)
        if (dyadic.included(i))
            order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dyadic.length(a) < dyadic.length(b); });

    std::string word;
    for (std::size_t n = 0; n < order.size(); ++n) {
        const auto len = static_cast<std::size_t>(dyadic.length(order[n]));
        if (n == 0) {
            word.assign(len, '0');
        } else {
            // Binary increment, then extend with zeros to the new length.
            std::size_t pos = word.size();
            while (pos > 0 && word[pos - 1] == '1')
                word[--pos] = '0';
            if (pos == 0)
                throw Error(ErrorCode::NotFullCode, "canonical code overflow");
            word[pos - 1] = '1';
            word.append(len - word.size(), '0');
        }
        codewords_[order[n]] = word;
    }

    trie_.emplace_back();
    for (std::size_t s : order) {
        std::size_t node = 0;
        for (char c : codewords_[s]) {
            const int bit = c == '1' ? 1 : 0;
            if (trie_[node].child[bit] < 0) {
                trie_[node].child[bit] = static_cast<std::int64_t>(trie_.size());
                trie_.emplace_back();
            }
            node = static_cast<std::size_t>(trie_[node].child[bit]);
        }
        trie_[node].symbol = static_cast<std::int64_t>(s);
    }
}

const std::string& PrefixCode::codeword(std::size_t symbol) const
{
    if (symbol >= codewords_.size() || !dyadic_.included(symbol))
        throw Error(ErrorCode::InvalidSymbol, "symbol " + std::to_string(symbol) + " is not in the code");
    return codewords_[symbol];
}

std::optional<std::size_t> PrefixCode::Parser::push(std::uint8_t bit)
{
    if (bit > 1)
        throw Error(ErrorCode::InvalidInput, "bits must be 0 or 1");
    const auto& trie = code_->trie_;
    const std::int64_t next = trie[node_].child[bit];
    if (next < 0)
        throw Error(ErrorCode::NotFullCode, "bit sequence leaves the code tree");
    node_ = static_cast<std::size_t>(next);
    if (trie[node_].symbol >= 0) {
        const auto s = static_cast<std::size_t>(trie[node_].symbol);
        node_ = 0;
        return s;
    }
    return std::nullopt;
}

std::vector<std::size_t> PrefixCode::encode(std::span<const std::uint8_t> bits) const
{
    if (trie_.front().symbol >= 0)
        throw Error(ErrorCode::InvalidInput, "a single-word code with an empty codeword cannot parse bits");
    Parser parser(*this);
    std::vector<std::size_t> symbols;
    for (std::uint8_t b : bits)
        if (auto s = parser.push(b))
            symbols.push_back(*s);
    return symbols;
}

std::vector<std::uint8_t> PrefixCode::decode(std::span<const std::size_t> symbols) const
{
    std::vector<std::uint8_t> bits;
    for (std::size_t s : symbols)
        for (char c : codeword(s))
            bits.push_back(c == '1' ? 1 : 0);
    return bits;
}

PrefixCode build_prefix_code(std::span<const int> lengths)
{
    return PrefixCode(DyadicPmf(std::vector<int>(lengths.begin(), lengths.end())));
}

} // namespace pfshape
