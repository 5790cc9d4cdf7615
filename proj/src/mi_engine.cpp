#include "pfshape/mi_engine.hpp"

#include "parallel.hpp"
#include "pfshape/error.hpp"
#include "pfshape/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>

namespace pfshape {

namespace {

constexpr double kDensityFloor = 1e-300;
// Tabulate the kernel only while it stays below 2^25 doubles (256 MiB).
constexpr std::size_t kMaxKernelEntries = std::size_t{1} << 25;

double safe_log(double v)
{
    return std::log(std::max(v, kDensityFloor));
}

bool is_point_mass(std::span<const double> p)
{
    return std::count_if(p.begin(), p.end(), [](double v) { return v > 0.0; }) == 1;
}

std::uint64_t checked_power(std::size_t m, int n)
{
    std::uint64_t len = 1;
    for (int j = 0; j < n; ++j) {
        len *= m;
        if (len > kMaxBlockEntries)
            throw Error(ErrorCode::BlockTooLarge, "joint alphabet m^n exceeds 2^24 entries");
    }
    return len;
}

} // namespace

void QuadratureSpec::validate() const
{
    if (nodes_per_axis < 4)
        throw Error(ErrorCode::InvalidArgument, "Gauss-Hermite needs at least 4 nodes per axis");
    if (scheme == QuadratureScheme::MonteCarlo && mc_samples < 10'000)
        throw Error(ErrorCode::InvalidArgument, "Monte Carlo needs at least 1e4 samples");
    if (mc_samples < 2)
        throw Error(ErrorCode::InvalidArgument, "Monte Carlo sample count must be at least 2");
}

double conditional_entropy(const NoiseModel& noise)
{
    if (!(noise.variance > 0.0))
        throw Error(ErrorCode::InvalidArgument, "noise variance must be positive");
    return std::log(std::numbers::pi * std::numbers::e * noise.variance);
}

MiEngine::MiEngine(Constellation constellation, NoiseModel noise, QuadratureSpec quad)
    : constellation_(std::move(constellation)), noise_(noise), quad_(quad)
{
    if (!(noise_.variance > 0.0) || !std::isfinite(noise_.variance))
        throw Error(ErrorCode::InvalidArgument, "noise variance must be positive");
    quad_.validate();

    const GaussHermiteRule rule = gauss_hermite(quad_.nodes_per_axis);
    const double sigma = std::sqrt(noise_.variance);
    const std::size_t q = rule.nodes.size();
    node_offsets_.reserve(q * q);
    node_weights_.reserve(q * q);
    for (std::size_t a = 0; a < q; ++a) {
        for (std::size_t b = 0; b < q; ++b) {
            node_offsets_.emplace_back(sigma * rule.nodes[a], sigma * rule.nodes[b]);
            node_weights_.push_back(rule.weights[a] * rule.weights[b] / std::numbers::pi);
        }
    }

    const std::size_t m = size();
    const std::size_t nk = node_count();
    if (m * m * nk <= kMaxKernelEntries) {
        kernel_.resize(m * nk * m);
        detail::parallel_for(m, quad_.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                for (std::size_t k = 0; k < nk; ++k)
                    kernel_row(i, k, kernel_.data() + (i * nk + k) * m);
        });
    }
}

void MiEngine::kernel_row(std::size_t i, std::size_t k, double* row) const
{
    const auto pts = constellation_.points();
    const Complex z = node_offsets_[k];
    const Complex y = pts[i] + z;
    const double zz = std::norm(z);
    for (std::size_t j = 0; j < pts.size(); ++j)
        row[j] = std::exp(-(std::norm(y - pts[j]) - zz) / noise_.variance);
}

void MiEngine::mixture_ratios(std::span<const double> p, std::vector<double>& out) const
{
    const std::size_t m = size();
    const std::size_t nk = node_count();
    out.assign(m * nk, 0.0);

    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < m; ++j)
        if (p[j] != 0.0)
            support.push_back(j);

    detail::parallel_for(m, quad_.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> scratch(kernel_.empty() ? m : 0);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t k = 0; k < nk; ++k) {
                const double* row;
                if (kernel_.empty()) {
                    kernel_row(i, k, scratch.data());
                    row = scratch.data();
                } else {
                    row = kernel_.data() + (i * nk + k) * m;
                }
                double s = 0.0;
                for (std::size_t j : support)
                    s += p[j] * row[j];
                out[i * nk + k] = s;
            }
        }
    });
}

std::vector<double> MiEngine::divergences(std::span<const double> p) const
{
    if (p.size() != size())
        throw Error(ErrorCode::InvalidInput, "PMF size does not match the constellation");
    const std::size_t m = size();
    const std::size_t nk = node_count();
    std::vector<double> ratios;
    mixture_ratios(p, ratios);
    std::vector<double> d(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < nk; ++k)
            acc -= node_weights_[k] * safe_log(ratios[i * nk + k]);
        d[i] = acc;
    }
    return d;
}

void MiEngine::divergences_and_jacobian(std::span<const double> p, std::vector<double>& divergences,
                                        std::vector<double>& jacobian) const
{
    if (p.size() != size())
        throw Error(ErrorCode::InvalidInput, "PMF size does not match the constellation");
    const std::size_t m = size();
    const std::size_t nk = node_count();
    std::vector<double> ratios;
    mixture_ratios(p, ratios);
    divergences.assign(m, 0.0);
    jacobian.assign(m * m, 0.0);

    detail::parallel_for(m, quad_.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> scratch(m);
        for (std::size_t i = begin; i < end; ++i) {
            double acc = 0.0;
            double* jrow = jacobian.data() + i * m;
            for (std::size_t k = 0; k < nk; ++k) {
                const double s = std::max(ratios[i * nk + k], kDensityFloor);
                acc -= node_weights_[k] * std::log(s);
                const double* row;
                if (kernel_.empty()) {
                    kernel_row(i, k, scratch.data());
                    row = scratch.data();
                } else {
                    row = kernel_.data() + (i * nk + k) * m;
                }
                const double coef = node_weights_[k] / s;
                for (std::size_t j = 0; j < m; ++j)
                    jrow[j] -= coef * row[j];
            }
            divergences[i] = acc;
        }
    });
}

double MiEngine::mutual_information(std::span<const double> p) const
{
    validate_pmf(p, size());
    if (is_point_mass(p))
        return 0.0;
    if (quad_.scheme == QuadratureScheme::MonteCarlo)
        return block_mutual_information(p, 1).value;
    const auto d = divergences(p);
    double mi = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0)
            mi += p[i] * d[i];
    return std::max(mi, 0.0);
}

std::vector<double> MiEngine::gradient(std::span<const double> p) const
{
    validate_pmf(p, size());
    auto d = divergences(p);
    for (auto& v : d)
        v -= 1.0;
    return d;
}

double MiEngine::raw_functional(std::span<const double> weights) const
{
    if (weights.size() != size())
        throw Error(ErrorCode::InvalidInput, "weight vector size does not match the constellation");
    for (double v : weights)
        if (!std::isfinite(v) || v < 0.0)
            throw Error(ErrorCode::InvalidInput, "weights must be finite and nonnegative");
    const auto d = divergences(weights);
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (weights[i] > 0.0)
            total += weights[i] * d[i];
    return total;
}

double MiEngine::output_kl(std::span<const double> p1, std::span<const double> p2) const
{
    validate_pmf(p1, size());
    validate_pmf(p2, size());
    const std::size_t nk = node_count();
    std::vector<double> r1;
    std::vector<double> r2;
    mixture_ratios(p1, r1);
    mixture_ratios(p2, r2);
    double kl = 0.0;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        if (p1[i] <= 0.0)
            continue;
        double acc = 0.0;
        for (std::size_t k = 0; k < nk; ++k)
            acc += node_weights_[k] * (safe_log(r1[i * nk + k]) - safe_log(r2[i * nk + k]));
        kl += p1[i] * acc;
    }
    // Quadrature can leave a tiny negative value when q1 == q2.
    return std::max(kl, 0.0);
}

double MiEngine::output_density(std::span<const double> p, Complex y) const
{
    if (p.size() != size())
        throw Error(ErrorCode::InvalidInput, "PMF size does not match the constellation");
    const auto pts = constellation_.points();
    const double norm = 1.0 / (std::numbers::pi * noise_.variance);
    double q = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (p[i] != 0.0)
            q += p[i] * norm * std::exp(-std::norm(y - pts[i]) / noise_.variance);
    return q;
}

McEstimate MiEngine::block_mutual_information(std::span<const double> joint, int n,
                                              const ProgressFn& progress) const
{
    const MixtureRef refs[] = {{joint, -1.0}};
    return monte_carlo(joint, n, refs, progress);
}

McEstimate MiEngine::block_output_kl(std::span<const double> joint1, std::span<const double> joint2, int n,
                                     const ProgressFn& progress) const
{
    const MixtureRef refs[] = {{joint1, 1.0}, {joint2, -1.0}};
    McEstimate est = monte_carlo(joint1, n, refs, progress);
    return est;
}

McEstimate MiEngine::block_cross_divergence(std::span<const double> joint1, std::span<const double> joint2,
                                            int n, const ProgressFn& progress) const
{
    const MixtureRef refs[] = {{joint2, -1.0}};
    return monte_carlo(joint1, n, refs, progress);
}

McEstimate MiEngine::monte_carlo(std::span<const double> sample_joint, int n, std::span<const MixtureRef> refs,
                                 const ProgressFn& progress) const
{
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, "block length must be at least 1");
    const std::size_t m = size();
    const std::uint64_t len = checked_power(m, n);
    validate_pmf(sample_joint, len);
    for (const auto& ref : refs)
        validate_pmf(ref.joint, len);
    const auto un = static_cast<std::size_t>(n);

    // Sparse view of each reference mixture: digits (first symbol most
    // significant) and probabilities of the nonzero tuples.
    struct Sparse {
        std::vector<std::uint32_t> digits;
        std::vector<double> probs;
        double coefficient;
    };
    auto decode = [&](std::uint64_t t, std::uint32_t* out) {
        for (std::size_t j = un; j-- > 0;) {
            out[j] = static_cast<std::uint32_t>(t % m);
            t /= m;
        }
    };
    std::vector<Sparse> sparse;
    for (const auto& ref : refs) {
        Sparse s{{}, {}, ref.coefficient};
        for (std::uint64_t t = 0; t < len; ++t) {
            if (ref.joint[t] > 0.0) {
                s.probs.push_back(ref.joint[t]);
                s.digits.resize(s.digits.size() + un);
                decode(t, s.digits.data() + s.digits.size() - un);
            }
        }
        sparse.push_back(std::move(s));
    }

    std::vector<std::uint64_t> index;
    std::vector<double> cumulative;
    double running = 0.0;
    for (std::uint64_t t = 0; t < len; ++t) {
        if (sample_joint[t] > 0.0) {
            running += sample_joint[t];
            index.push_back(t);
            cumulative.push_back(running);
        }
    }

    const std::uint64_t total = quad_.mc_samples;
    constexpr std::uint64_t kChunk = 4096;
    const std::size_t chunks = static_cast<std::size_t>((total + kChunk - 1) / kChunk);
    std::vector<double> chunk_mean(chunks, 0.0);
    std::vector<double> chunk_m2(chunks, 0.0);
    std::vector<std::uint64_t> chunk_count(chunks, 0);

    const auto pts = constellation_.points();
    const double var = noise_.variance;
    const double axis_sd = std::sqrt(var / 2.0);

    std::atomic<std::size_t> done{0};
    std::atomic<int> reported{0};
    std::mutex progress_mutex;

    detail::parallel_for(chunks, quad_.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint32_t> digits(un);
        std::vector<Complex> z(un);
        std::vector<double> ratio(un * m);
        for (std::size_t c = begin; c < end; ++c) {
            std::seed_seq seq{static_cast<std::uint32_t>(quad_.seed), static_cast<std::uint32_t>(quad_.seed >> 32),
                              static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> uniform(0.0, running);
            std::normal_distribution<double> gauss(0.0, axis_sd);

            const std::uint64_t count = std::min<std::uint64_t>(kChunk, total - c * kChunk);
            double mean = 0.0;
            double m2 = 0.0;
            for (std::uint64_t s = 0; s < count; ++s) {
                const double u = uniform(rng);
                auto pos = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                    cumulative.begin());
                pos = std::min(pos, cumulative.size() - 1);
                decode(index[pos], digits.data());
                for (std::size_t j = 0; j < un; ++j) {
                    const double re = gauss(rng);
                    const double im = gauss(rng);
                    z[j] = Complex(re, im);
                }
                for (std::size_t j = 0; j < un; ++j) {
                    const Complex y = pts[digits[j]] + z[j];
                    const double zz = std::norm(z[j]);
                    for (std::size_t i = 0; i < m; ++i)
                        ratio[j * m + i] = std::exp(-(std::norm(y - pts[i]) - zz) / var);
                }
                double value = 0.0;
                for (const auto& sp : sparse) {
                    double q = 0.0;
                    const std::size_t nz = sp.probs.size();
                    for (std::size_t e = 0; e < nz; ++e) {
                        const std::uint32_t* d = sp.digits.data() + e * un;
                        double term = sp.probs[e];
                        for (std::size_t j = 0; j < un; ++j)
                            term *= ratio[j * m + d[j]];
                        q += term;
                    }
                    value += sp.coefficient * safe_log(q);
                }
                // Welford update within the chunk.
                const double delta = value - mean;
                mean += delta / static_cast<double>(s + 1);
                m2 += delta * (value - mean);
            }
            chunk_mean[c] = mean;
            chunk_m2[c] = m2;
            chunk_count[c] = count;

            if (progress) {
                const std::size_t finished = ++done;
                const int decile = static_cast<int>(finished * 10 / chunks);
                int prev = reported.load();
                while (decile > prev && !reported.compare_exchange_weak(prev, decile)) {
                }
                if (decile > prev) {
                    std::lock_guard lock(progress_mutex);
                    progress(decile / 10.0);
                }
            }
        }
    });

    // Combine chunk statistics in chunk order (Chan et al.).
    double mean = 0.0;
    double m2 = 0.0;
    double count = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        const double nb = static_cast<double>(chunk_count[c]);
        const double delta = chunk_mean[c] - mean;
        const double combined = count + nb;
        mean += delta * nb / combined;
        m2 += chunk_m2[c] + delta * delta * count * nb / combined;
        count = combined;
    }
    McEstimate est;
    est.value = mean;
    est.std_error = std::sqrt(m2 / (count - 1.0) / count);
    return est;
}

} // namespace pfshape
