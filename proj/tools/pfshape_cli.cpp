// Command-line front end. Talks to the library exclusively through the C API.

#include "pfshape/pfshape.h"
#include "reference_values.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using nlohmann::ordered_json;
namespace fs = std::filesystem;
namespace ref = pfshape::reference;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCompute = 1;
constexpr int kExitUsage = 2;

struct Failure {
    int exit_code;
    std::string message;
};

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{kExitUsage, msg}; }

void check(pfs_status st)
{
    if (st == PFS_OK)
        return;
    std::string msg = std::string(pfs_status_string(st)) + ": " + pfs_last_error();
    switch (st) {
    case PFS_ERR_CONVERGENCE:
    case PFS_ERR_INTERNAL:
    case PFS_ERR_BUFFER:
        throw Failure{kExitCompute, msg};
    default:
        throw Failure{kExitUsage, msg};
    }
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Constellation = std::unique_ptr<pfs_constellation, Deleter<pfs_constellation, pfs_constellation_free>>;
using Channel = std::unique_ptr<pfs_channel, Deleter<pfs_channel, pfs_channel_free>>;
using Solver = std::unique_ptr<pfs_solver, Deleter<pfs_solver, pfs_solver_free>>;
using Solution = std::unique_ptr<pfs_solution, Deleter<pfs_solution, pfs_solution_free>>;
using Dyadic = std::unique_ptr<pfs_dyadic, Deleter<pfs_dyadic, pfs_dyadic_free>>;
using Code = std::unique_ptr<pfs_code, Deleter<pfs_code, pfs_code_free>>;
using Block = std::unique_ptr<pfs_block, Deleter<pfs_block, pfs_block_free>>;

// ---------------------------------------------------------------- logging

int g_verbosity = 0;

void log(int level, const std::string& msg)
{
    if (g_verbosity >= level)
        std::cerr << msg << '\n';
}

void progress_cb(double fraction, void* user)
{
    const auto* what = static_cast<const char*>(user);
    if (g_verbosity >= 1)
        std::cerr << what << ": " << static_cast<int>(std::lround(fraction * 100.0)) << "%\n";
}

// ---------------------------------------------------------------- options

struct Options {
    int qam = 0;
    double max_energy = 0.0;
    std::string constellation_file;
    double noise_variance = 1.0;
    double e_bar = std::numeric_limits<double>::infinity();
    std::string e_grid;
    std::vector<int> n{1};
    int gh_nodes = 48;
    std::uint64_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
    double tol = 1e-7;
    std::string out;
    std::string units = "nats";
    unsigned threads = 1;
    std::string preset;
};

double info_scale(const Options& o) { return o.units == "bits" ? 1.0 / std::numbers::ln2 : 1.0; }

// lo:step:hi inclusive; points are lo + k*step rounded to 12 significant digits.
std::vector<double> parse_grid(const std::string& spec)
{
    double lo = 0.0;
    double step = 0.0;
    double hi = 0.0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(spec);
    if (!(in >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
        usage_error("--e-grid expects lo:step:hi, got '" + spec + "'");
    if (!(step > 0.0) || hi < lo || !std::isfinite(lo) || !std::isfinite(hi))
        usage_error("--e-grid needs step > 0 and lo <= hi");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count > 1'000'000)
        usage_error("--e-grid has too many points");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    for (long k = 0; k < count; ++k) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", lo + static_cast<double>(k) * step);
        grid.push_back(std::strtod(buf, nullptr));
    }
    return grid;
}

std::string fmt(double v)
{
    if (std::isnan(v))
        return "";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// JSON cannot hold infinities; they are written as strings.
ordered_json jnum(double v)
{
    if (std::isfinite(v))
        return v;
    return std::isnan(v) ? ordered_json("nan") : ordered_json(v > 0 ? "inf" : "-inf");
}

ordered_json jvec(const std::vector<double>& v)
{
    ordered_json a = ordered_json::array();
    for (double x : v)
        a.push_back(jnum(x));
    return a;
}

// ---------------------------------------------------------------- output

fs::path out_dir(const Options& o)
{
    fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Failure{kExitUsage, "cannot create output directory " + dir.string() + ": " + ec.message()};
    return dir;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Failure{kExitUsage, "cannot write " + path.string()};
    f << text;
    if (!f)
        throw Failure{kExitUsage, "write failed for " + path.string()};
    log(1, "wrote " + path.string());
}

// Single results go to stdout unless --out names a directory.
void emit(const Options& o, const std::string& filename, const std::string& text)
{
    if (o.out.empty())
        std::cout << text;
    else
        write_file(out_dir(o) / filename, text);
}

std::string read_text(const std::string& path)
{
    if (path == "-")
        return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    std::ifstream f(path, std::ios::binary);
    if (!f)
        usage_error("cannot read " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- library helpers

Constellation make_constellation(const Options& o)
{
    pfs_constellation* c = nullptr;
    if (!o.constellation_file.empty()) {
        check(pfs_constellation_load(o.constellation_file.c_str(), &c));
    } else {
        if (o.qam == 0 || o.max_energy == 0.0)
            usage_error("specify --qam with --max-energy, or --constellation");
        check(pfs_constellation_qam(o.qam, o.max_energy, &c));
    }
    return Constellation(c);
}

pfs_quadrature quadrature(const Options& o)
{
    pfs_quadrature q = pfs_quadrature_default();
    q.nodes_per_axis = o.gh_nodes;
    q.mc_samples = o.mc_samples;
    q.seed = o.seed;
    q.threads = o.threads;
    return q;
}

struct Setup {
    Constellation constellation;
    Channel channel;
    std::vector<double> energies;
};

Setup make_setup(const Options& o)
{
    Setup s;
    s.constellation = make_constellation(o);
    const pfs_quadrature q = quadrature(o);
    pfs_channel* ch = nullptr;
    check(pfs_channel_create(s.constellation.get(), o.noise_variance, &q, &ch));
    s.channel.reset(ch);
    s.energies.resize(pfs_constellation_size(s.constellation.get()));
    size_t len = 0;
    check(pfs_constellation_energies(s.constellation.get(), s.energies.data(), s.energies.size(), &len));
    return s;
}

Solver make_solver(const pfs_channel* ch, const Options& o)
{
    pfs_solver_options so = pfs_solver_options_default();
    so.tol = o.tol;
    pfs_solver* s = nullptr;
    check(pfs_solver_create(ch, &so, &s));
    return Solver(s);
}

Solution solve(pfs_solver* s, double e_bar)
{
    pfs_solution* sol = nullptr;
    check(pfs_solve(s, e_bar, &sol));
    return Solution(sol);
}

pfs_solution_info info(const pfs_solution* sol)
{
    pfs_solution_info i{};
    check(pfs_solution_get_info(sol, &i));
    return i;
}

std::vector<double> pmf_of(const pfs_solution* sol)
{
    size_t len = 0;
    pfs_solution_pmf(sol, nullptr, 0, &len);
    std::vector<double> p(len);
    check(pfs_solution_pmf(sol, p.data(), p.size(), &len));
    return p;
}

std::vector<int> lengths_of(const pfs_dyadic* d)
{
    std::vector<int> l(pfs_dyadic_size(d));
    size_t len = 0;
    check(pfs_dyadic_lengths(d, l.data(), l.size(), &len));
    return l;
}

std::vector<double> probs_of(const pfs_dyadic* d)
{
    std::vector<double> p(pfs_dyadic_size(d));
    size_t len = 0;
    check(pfs_dyadic_probs(d, p.data(), p.size(), &len));
    return p;
}

Dyadic ghc_of(const std::vector<double>& p)
{
    pfs_dyadic* d = nullptr;
    check(pfs_ghc(p.data(), p.size(), &d));
    return Dyadic(d);
}

pfs_operating_point op_of(const pfs_channel* ch, const std::vector<double>& p)
{
    pfs_operating_point op{};
    check(pfs_operating_point_of(ch, p.data(), p.size(), &op));
    return op;
}

double relerr_pct(double approx, double target) { return 100.0 * pfs_relative_error(approx, target); }

ordered_json solution_json(const pfs_solution* sol, const Options& o)
{
    const auto i = info(sol);
    const double s = info_scale(o);
    ordered_json j;
    j["e_bar"] = jnum(i.e_bar);
    j["pmf"] = jvec(pmf_of(sol));
    j["nu"] = i.nu * s;
    j["lambda"] = i.lambda * s;
    j["energy"] = i.energy;
    j["mi"] = i.mi * s;
    j["kkt_residual"] = i.kkt_residual;
    j["power_constraint_active"] = i.power_constraint_active != 0;
    j["units"] = o.units;
    return j;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled by exactly one worker.
template <class Fn>
void parallel_indices(std::size_t n, unsigned threads, Fn&& fn)
{
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < n; i = next++)
                        fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    next = n;
                }
            });
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

// ---------------------------------------------------------------- subcommands

int cmd_solve(const Options& o)
{
    Setup s = make_setup(o);
    if (!o.e_grid.empty()) {
        const auto grid = parse_grid(o.e_grid);
        std::vector<pfs_curve_point> curve(grid.size());
        size_t failed = 0;
        check(pfs_capacity_curve(s.channel.get(), grid.data(), grid.size(), o.tol, curve.data(), &failed));
        if (!pfs_curve_is_concave(curve.data(), curve.size(), 1e-6))
            std::cerr << "warning: traced capacity curve violates concavity\n";
        std::string csv = "E,C,nu,active\n";
        for (const auto& p : curve)
            csv += fmt(p.energy) + "," + fmt(p.capacity * info_scale(o)) + "," + fmt(p.nu * info_scale(o)) + "," +
                   (p.constraint_active ? "1" : "0") + "\n";
        emit(o, "capacity_curve.csv", csv);
        return kExitOk;
    }
    Solver solver = make_solver(s.channel.get(), o);
    Solution sol = solve(solver.get(), o.e_bar);
    emit(o, "solution.json", solution_json(sol.get(), o).dump(2) + "\n");
    return kExitOk;
}

struct GhcOptions {
    std::string pmf_file;
    std::string method = "ghc";
    int max_len = 10;
};

std::vector<double> parse_pmf_json(const std::string& text)
{
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        usage_error(std::string("PMF is not valid JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("pmf"))
        j = j["pmf"];
    if (!j.is_array())
        usage_error("PMF must be a JSON array of numbers");
    std::vector<double> p;
    for (const auto& v : j) {
        if (!v.is_number())
            usage_error("PMF entries must be numbers");
        p.push_back(v.get<double>());
    }
    return p;
}

int cmd_ghc(const Options& o, const GhcOptions& g)
{
    std::vector<double> p;
    if (!g.pmf_file.empty()) {
        p = parse_pmf_json(read_text(g.pmf_file));
    } else {
        Setup s = make_setup(o);
        Solver solver = make_solver(s.channel.get(), o);
        p = pmf_of(solve(solver.get(), o.e_bar).get());
    }
    pfs_dyadic* raw = nullptr;
    if (g.method == "ghc")
        check(pfs_ghc(p.data(), p.size(), &raw));
    else if (g.method == "huffman")
        check(pfs_huffman(p.data(), p.size(), &raw));
    else
        check(pfs_ghc_bruteforce(p.data(), p.size(), g.max_len, &raw));
    Dyadic d(raw);
    const auto lengths = lengths_of(d.get());
    const auto probs = probs_of(d.get());

    pfs_code* rc = nullptr;
    ordered_json words = ordered_json::array();
    if (pfs_code_create(d.get(), &rc) == PFS_OK) {
        Code code(rc);
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            if (lengths[i] == PFS_EXCLUDED) {
                words.push_back(nullptr);
                continue;
            }
            std::vector<char> buf(static_cast<std::size_t>(lengths[i]) + 1);
            size_t len = 0;
            check(pfs_code_word(code.get(), i, buf.data(), buf.size(), &len));
            words.push_back(std::string(buf.data(), len));
        }
    }
    double kl = 0.0;
    check(pfs_kl(probs.data(), p.data(), p.size(), &kl));

    ordered_json j;
    j["method"] = g.method;
    j["lengths"] = lengths;
    j["codewords"] = words;
    j["dyadic_pmf"] = jvec(probs);
    j["kl"] = jnum(kl * info_scale(o));
    j["units"] = o.units;
    emit(o, "code.json", j.dump(2) + "\n");
    return kExitOk;
}

struct CodecOptions {
    std::string code_file;
    std::string input = "-";
    std::string output = "-";
};

Code load_code(const std::string& path)
{
    ordered_json j;
    try {
        j = ordered_json::parse(read_text(path));
    } catch (const std::exception& e) {
        usage_error(std::string("code file is not valid JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("lengths"))
        j = j["lengths"];
    if (!j.is_array())
        usage_error("code file must hold a JSON array of lengths or an object with \"lengths\"");
    std::vector<int> lengths;
    for (const auto& v : j) {
        if (!v.is_number_integer())
            usage_error("lengths must be integers (-1 marks an excluded symbol)");
        lengths.push_back(v.get<int>());
    }
    pfs_dyadic* d = nullptr;
    check(pfs_dyadic_from_lengths(lengths.data(), lengths.size(), &d));
    Dyadic dy(d);
    pfs_code* c = nullptr;
    check(pfs_code_create(dy.get(), &c));
    return Code(c);
}

void write_stream(const std::string& path, const std::string& text)
{
    if (path == "-")
        std::cout << text;
    else
        write_file(path, text);
}

int cmd_encode(const CodecOptions& c)
{
    Code code = load_code(c.code_file);
    std::vector<std::uint8_t> bits;
    for (char ch : read_text(c.input)) {
        if (ch == '0' || ch == '1')
            bits.push_back(static_cast<std::uint8_t>(ch - '0'));
        else if (!std::isspace(static_cast<unsigned char>(ch)))
            usage_error(std::string("bit stream may only contain 0, 1 and whitespace, found '") + ch + "'");
    }
    size_t len = 0;
    pfs_code_encode(code.get(), bits.data(), bits.size(), nullptr, 0, &len);
    std::vector<size_t> symbols(len);
    check(pfs_code_encode(code.get(), bits.data(), bits.size(), symbols.data(), symbols.size(), &len));
    std::string out;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        out += std::to_string(symbols[i]);
        out += (i + 1) % 32 == 0 || i + 1 == symbols.size() ? '\n' : ' ';
    }
    write_stream(c.output, out);
    return kExitOk;
}

int cmd_decode(const CodecOptions& c)
{
    Code code = load_code(c.code_file);
    std::vector<size_t> symbols;
    std::istringstream in(read_text(c.input));
    std::string tok;
    while (in >> tok) {
        if (tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 18)
            usage_error("symbol stream must hold whitespace-separated nonnegative indices, found '" + tok + "'");
        symbols.push_back(static_cast<size_t>(std::stoull(tok)));
    }
    size_t len = 0;
    {
        const pfs_status st = pfs_code_decode(code.get(), symbols.data(), symbols.size(), nullptr, 0, &len);
        if (st != PFS_OK && st != PFS_ERR_BUFFER)
            check(st);
    }
    std::vector<std::uint8_t> bits(len);
    check(pfs_code_decode(code.get(), symbols.data(), symbols.size(), bits.data(), bits.size(), &len));
    std::string out;
    out.reserve(bits.size() + bits.size() / 64 + 1);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        out += static_cast<char>('0' + bits[i]);
        if ((i + 1) % 64 == 0 || i + 1 == bits.size())
            out += '\n';
    }
    write_stream(c.output, out);
    return kExitOk;
}

struct BlockResult {
    int n;
    pfs_block_info info;
    Block block;
};

BlockResult run_block(const pfs_channel* ch, const pfs_solution* sol, int n)
{
    static char label[] = "block design";
    pfs_block* b = nullptr;
    check(pfs_design_block(ch, sol, n, progress_cb, label, &b));
    BlockResult r{n, {}, Block(b)};
    check(pfs_block_get_info(r.block.get(), &r.info));
    return r;
}

ordered_json block_json(const BlockResult& r, const pfs_solution_info& target, const Options& o)
{
    const double s = info_scale(o);
    ordered_json j;
    j["n"] = r.n;
    j["energy"] = r.info.per_symbol_energy;
    j["mi"] = r.info.per_symbol_mi * s;
    j["mi_stderr"] = r.info.per_symbol_mi_stderr * s;
    j["kl_per_use"] = r.info.per_symbol_kl * s;
    j["energy_error_pct"] = relerr_pct(r.info.per_symbol_energy, target.energy);
    j["mi_error_pct"] = relerr_pct(r.info.per_symbol_mi, target.mi);
    return j;
}

int cmd_block(const Options& o)
{
    if (o.n.size() != 1)
        usage_error("block takes a single --n");
    const int n = o.n.front();
    Setup s = make_setup(o);
    Solver solver = make_solver(s.channel.get(), o);
    Solution sol = solve(solver.get(), o.e_bar);
    const auto target = info(sol.get());
    BlockResult r = run_block(s.channel.get(), sol.get(), n);

    ordered_json j;
    j["e_bar"] = jnum(o.e_bar);
    j["target"] = {{"energy", target.energy}, {"mi", target.mi * info_scale(o)}};
    j["design"] = block_json(r, target, o);
    std::vector<int> lengths(r.info.joint_size);
    size_t len = 0;
    check(pfs_block_lengths(r.block.get(), lengths.data(), lengths.size(), &len));
    if (lengths.size() > 4096) {
        const std::string name = "block-n" + std::to_string(n) + "-lengths.json";
        write_file(out_dir(o) / name, ordered_json(lengths).dump() + "\n");
        j["lengths_file"] = name;
    } else {
        j["lengths"] = lengths;
    }
    j["units"] = o.units;
    emit(o, "block-n" + std::to_string(n) + ".json", j.dump(2) + "\n");
    return kExitOk;
}

ordered_json prop1_json(const pfs_prop1_report& r, const Options& o)
{
    const double s = info_scale(o);
    ordered_json j;
    j["residual"] = r.residual * s;
    j["tolerance"] = r.tolerance * s;
    j["support_condition"] = r.support_condition != 0;
    j["within_tolerance"] = r.within_tolerance != 0;
    j["energy"] = r.e_tilde;
    j["mi"] = r.i_tilde * s;
    j["output_kl"] = r.output_kl * s;
    return j;
}

struct VerifyOptions {
    int random = 0;
    double slope_delta = 0.05;
};

int cmd_verify(const Options& o, const VerifyOptions& v)
{
    Setup s = make_setup(o);
    Solver solver = make_solver(s.channel.get(), o);
    Solution sol = solve(solver.get(), o.e_bar);
    const auto target = info(sol.get());
    const auto pstar = pmf_of(sol.get());

    ordered_json j;
    j["solution"] = {{"e_bar", jnum(o.e_bar)},
                     {"energy", target.energy},
                     {"mi", target.mi * info_scale(o)},
                     {"nu", target.nu * info_scale(o)},
                     {"kkt_residual", target.kkt_residual},
                     {"kkt_within_tol", target.kkt_residual <= o.tol}};

    pfs_slope_report slope{};
    if (target.power_constraint_active) {
        check(pfs_slope_consistency(solver.get(), sol.get(), v.slope_delta, &slope));
        j["slope"] = {{"delta", v.slope_delta},
                      {"nu", slope.nu * info_scale(o)},
                      {"central_difference", slope.central_difference * info_scale(o)},
                      {"relative_mismatch", slope.relative_mismatch},
                      {"defined", slope.defined != 0}};
    } else {
        j["slope"] = {{"defined", false}, {"note", "power constraint inactive; slope is zero on the plateau"}};
    }

    ordered_json designs = ordered_json::array();
    for (int n : o.n) {
        if (n == 1) {
            const auto d = ghc_of(pstar);
            const auto pt = probs_of(d.get());
            pfs_prop1_report r{};
            check(pfs_prop1(s.channel.get(), pt.data(), pt.size(), sol.get(), &r));
            ordered_json e = prop1_json(r, o);
            e["n"] = 1;
            designs.push_back(e);
        } else {
            BlockResult b = run_block(s.channel.get(), sol.get(), n);
            static char label[] = "block identity";
            pfs_prop1_report r{};
            check(pfs_block_prop1(s.channel.get(), sol.get(), b.block.get(), progress_cb, label, &r));
            ordered_json e = prop1_json(r, o);
            e["n"] = n;
            designs.push_back(e);
        }
    }
    j["designs"] = designs;

    // Random PMFs supported inside supp(p*).
    ordered_json randoms = ordered_json::array();
    std::mt19937_64 rng(o.seed);
    std::exponential_distribution<double> expo(1.0);
    int within = 0;
    for (int k = 0; k < v.random; ++k) {
        std::vector<double> p(pstar.size(), 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (pstar[i] > 0.0) {
                p[i] = expo(rng);
                sum += p[i];
            }
        for (auto& x : p)
            x /= sum;
        pfs_prop1_report r{};
        check(pfs_prop1(s.channel.get(), p.data(), p.size(), sol.get(), &r));
        within += r.within_tolerance ? 1 : 0;
        randoms.push_back(prop1_json(r, o));
    }
    j["random"] = {{"count", v.random}, {"within_tolerance", within}, {"reports", randoms}};
    j["units"] = o.units;
    emit(o, "verify.json", j.dump(2) + "\n");
    return kExitOk;
}

// One row of the baseline table. NaN cells print empty.
struct BaselineRow {
    double e;
    double c;
    double i_sg = std::numeric_limits<double>::quiet_NaN();
    double i_huff = std::numeric_limits<double>::quiet_NaN();
    double i_ghc = std::numeric_limits<double>::quiet_NaN();
    double e_huff = std::numeric_limits<double>::quiet_NaN();
    double e_ghc = std::numeric_limits<double>::quiet_NaN();
};

std::vector<BaselineRow> baseline_rows(const Setup& s, const Options& o, std::vector<double> grid,
                                       bool include_plateau)
{
    Solver solver = make_solver(s.channel.get(), o);
    if (include_plateau) {
        Solution u = solve(solver.get(), std::numeric_limits<double>::infinity());
        const double e_star = info(u.get()).energy;
        if (std::find(grid.begin(), grid.end(), e_star) == grid.end())
            grid.insert(std::upper_bound(grid.begin(), grid.end(), e_star), e_star);
    }
    std::vector<BaselineRow> rows(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        Solution sol = solve(solver.get(), grid[g]);
        const auto d = ghc_of(pmf_of(sol.get()));
        const auto op = op_of(s.channel.get(), probs_of(d.get()));
        rows[g].e = grid[g];
        rows[g].c = info(sol.get()).mi;
        rows[g].i_ghc = op.mi;
        rows[g].e_ghc = op.energy;
    }
    // Sampled-Gaussian columns are independent per row.
    parallel_indices(grid.size(), o.threads, [&](std::size_t g) {
        double lambda = 0.0;
        if (pfs_sg_lambda(s.constellation.get(), grid[g], &lambda) != PFS_OK)
            return;  // outside the range reachable by the family
        std::vector<double> p(s.energies.size());
        check(pfs_sg_pmf(s.constellation.get(), lambda, p.data(), p.size()));
        check(pfs_mutual_information(s.channel.get(), p.data(), p.size(), &rows[g].i_sg));
        pfs_operating_point h{};
        check(pfs_huffman_shaping_point(s.channel.get(), lambda, &h));
        rows[g].i_huff = h.mi;
        rows[g].e_huff = h.energy;
    });
    return rows;
}

std::string baseline_csv(const std::vector<BaselineRow>& rows, const Options& o)
{
    const double s = info_scale(o);
    std::string csv = "E,C,I_SG,I_huffman_dyadic,I_ghc_dyadic,E_huffman_dyadic,E_ghc_dyadic\n";
    for (const auto& r : rows)
        csv += fmt(r.e) + "," + fmt(r.c * s) + "," + fmt(r.i_sg * s) + "," + fmt(r.i_huff * s) + "," +
               fmt(r.i_ghc * s) + "," + fmt(r.e_huff) + "," + fmt(r.e_ghc) + "\n";
    return csv;
}

int cmd_baseline(const Options& o)
{
    Setup s = make_setup(o);
    const auto grid = parse_grid(o.e_grid.empty() ? "2.5:0.1:12" : o.e_grid);
    emit(o, "baselines.csv", baseline_csv(baseline_rows(s, o, grid, false), o));
    return kExitOk;
}

// ---------------------------------------------------------------- presets

struct Checks {
    ordered_json list = ordered_json::array();
    bool all = true;

    void add(const std::string& name, double value, ref::Band band)
    {
        const bool pass = band.contains(value);
        all = all && pass;
        list.push_back({{"name", name}, {"value", jnum(value)}, {"reference", band.value}, {"tolerance", band.tol},
                        {"pass", pass}});
    }
    void add(const std::string& name, bool pass)
    {
        all = all && pass;
        list.push_back({{"name", name}, {"pass", pass}});
    }
};

ordered_json summary(const std::string& preset, const Options& o, double max_energy, ordered_json results,
                     const Checks& checks)
{
    ordered_json j;
    j["preset"] = preset;
    j["config"] = {{"constellation", "64-QAM"},
                   {"max_energy", max_energy},
                   {"noise_variance", 1.0},
                   {"gh_nodes", o.gh_nodes},
                   {"mc_samples", o.mc_samples},
                   {"seed", o.seed},
                   {"tol", o.tol},
                   {"units", o.units}};
    j["results"] = std::move(results);
    j["checks"] = checks.list;
    j["all_pass"] = checks.all;
    j["note"] = "checks compare nats values regardless of --units";
    return j;
}

Options preset_options(const Options& base, double max_energy)
{
    Options o = base;
    o.qam = 64;
    o.max_energy = max_energy;
    o.constellation_file.clear();
    o.noise_variance = 1.0;
    return o;
}

int preset_fig4(const Options& base)
{
    const Options o = preset_options(base, ref::kWideMaxEnergy);
    Setup s = make_setup(o);
    const fs::path dir = out_dir(o);
    constexpr std::size_t kCount = std::size(ref::kPmfMapEbars);
    std::vector<std::vector<double>> pmfs(kCount);
    std::vector<pfs_solution_info> infos(kCount);
    parallel_indices(kCount, o.threads, [&](std::size_t k) {
        Solver solver = make_solver(s.channel.get(), o);
        Solution sol = solve(solver.get(), ref::kPmfMapEbars[k]);
        pmfs[k] = pmf_of(sol.get());
        infos[k] = info(sol.get());
    });

    ordered_json results = ordered_json::array();
    Checks checks;
    for (std::size_t k = 0; k < kCount; ++k) {
        const double eb = ref::kPmfMapEbars[k];
        std::string csv;
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c)
                csv += fmt(pmfs[k][static_cast<std::size_t>(r * 8 + c)]) + (c == 7 ? "\n" : ",");
        const std::string name = "fig4-pmf-Ebar" + fmt(eb) + ".csv";
        write_file(dir / name, csv);
        const bool mono = pfs_is_monotone_in_energy(pmfs[k].data(), s.energies.data(), pmfs[k].size(), 1e-9) != 0;
        results.push_back({{"e_bar", eb},
                           {"file", name},
                           {"energy", infos[k].energy},
                           {"mi", infos[k].mi * info_scale(o)},
                           {"nu", infos[k].nu * info_scale(o)},
                           {"power_constraint_active", infos[k].power_constraint_active != 0},
                           {"monotone_in_energy", mono}});
        if (eb == 2.5 || eb == 5.0)
            checks.add("monotone PMF at Ebar=" + fmt(eb), mono);
        if (eb == 10.0)
            checks.add("non-monotone PMF at Ebar=10", !mono);
        if (eb == 20.0)
            checks.add("unconstrained energy at Ebar=20", infos[k].energy, ref::kUnconstrainedEnergy);
    }
    write_file(dir / "fig4-pmfs.json", summary("fig4-pmfs", o, ref::kWideMaxEnergy, results, checks).dump(2) + "\n");
    return kExitOk;
}

int preset_fig5_points(const Options& base)
{
    const Options o = preset_options(base, ref::kWideMaxEnergy);
    Setup s = make_setup(o);
    const fs::path dir = out_dir(o);
    const double sc = info_scale(o);

    const auto grid = parse_grid(fmt(ref::kGridLo) + ":" + fmt(ref::kGridStep) + ":" + fmt(ref::kGridHi));
    std::vector<pfs_curve_point> curve(grid.size());
    size_t failed = 0;
    check(pfs_capacity_curve(s.channel.get(), grid.data(), grid.size(), o.tol, curve.data(), &failed));
    std::string csv = "E,C,nu,active\n";
    for (const auto& p : curve)
        csv += fmt(p.energy) + "," + fmt(p.capacity * sc) + "," + fmt(p.nu * sc) + "," +
               (p.constraint_active ? "1" : "0") + "\n";
    write_file(dir / "capacity-curve.csv", csv);

    Solver solver = make_solver(s.channel.get(), o);
    Solution sol = solve(solver.get(), ref::kDesignEbar);
    const auto target = info(sol.get());
    const auto d = ghc_of(pmf_of(sol.get()));
    const auto op = op_of(s.channel.get(), probs_of(d.get()));
    Solution unc = solve(solver.get(), std::numeric_limits<double>::infinity());
    const auto ui = info(unc.get());

    std::string pts = "label,E,I\n";
    pts += "capacity-achieving," + fmt(target.energy) + "," + fmt(target.mi * sc) + "\n";
    pts += "ghc-dyadic-n1," + fmt(op.energy) + "," + fmt(op.mi * sc) + "\n";
    pts += "unconstrained," + fmt(ui.energy) + "," + fmt(ui.mi * sc) + "\n";
    write_file(dir / "operating-points.csv", pts);

    Checks checks;
    checks.add("capacity curve concave", pfs_curve_is_concave(curve.data(), curve.size(), 1e-6) != 0);
    checks.add("n=1 energy", op.energy, ref::kN1Energy);
    checks.add("n=1 mi", op.mi, ref::kN1Mi);
    checks.add("n=1 energy error pct", relerr_pct(op.energy, target.energy), ref::kN1EnergyGapPct);
    checks.add("n=1 mi error pct", relerr_pct(op.mi, target.mi), ref::kN1MiGapPct);
    checks.add("unconstrained energy", ui.energy, ref::kUnconstrainedEnergy);
    ordered_json results = {{"target", {{"energy", target.energy}, {"mi", target.mi * sc}}},
                            {"ghc_n1", {{"energy", op.energy}, {"mi", op.mi * sc}}},
                            {"unconstrained", {{"energy", ui.energy}, {"mi", ui.mi * sc}}}};
    write_file(dir / "fig5-operating-points.json",
               summary("fig5-operating-points", o, ref::kWideMaxEnergy, results, checks).dump(2) + "\n");
    return kExitOk;
}

int preset_fig5_blocks(const Options& base)
{
    const Options o = preset_options(base, ref::kWideMaxEnergy);
    Setup s = make_setup(o);
    const fs::path dir = out_dir(o);
    const double sc = info_scale(o);
    Solver solver = make_solver(s.channel.get(), o);
    Solution sol = solve(solver.get(), ref::kDesignEbar);
    const auto target = info(sol.get());

    std::string csv = "n,E,I,I_stderr,energy_error_pct,mi_error_pct,kl_per_use\n";
    ordered_json rows = ordered_json::array();
    Checks checks;
    double prev_e = 0.0;
    double prev_i = 0.0;
    for (int n : {1, 2}) {
        log(1, "designing n=" + std::to_string(n));
        BlockResult b = run_block(s.channel.get(), sol.get(), n);
        const double ee = relerr_pct(b.info.per_symbol_energy, target.energy);
        const double ie = relerr_pct(b.info.per_symbol_mi, target.mi);
        csv += std::to_string(n) + "," + fmt(b.info.per_symbol_energy) + "," + fmt(b.info.per_symbol_mi * sc) + "," +
               fmt(b.info.per_symbol_mi_stderr * sc) + "," + fmt(ee) + "," + fmt(ie) + "," +
               fmt(b.info.per_symbol_kl * sc) + "\n";
        rows.push_back(block_json(b, target, o));
        if (n == 1) {
            checks.add("n=1 energy", b.info.per_symbol_energy, ref::kN1Energy);
            checks.add("n=1 mi", b.info.per_symbol_mi, ref::kN1Mi);
            prev_e = ee;
            prev_i = ie;
        } else {
            checks.add("n=2 energy", b.info.per_symbol_energy, ref::kN2Energy);
            checks.add("n=2 mi", b.info.per_symbol_mi, ref::kN2Mi);
            checks.add("n=2 energy error below n=1", std::abs(ee) < std::abs(prev_e));
            checks.add("n=2 mi error below n=1", std::abs(ie) < std::abs(prev_i));
        }
    }
    write_file(dir / "block-convergence.csv", csv);
    ordered_json results = {{"target", {{"energy", target.energy}, {"mi", target.mi * sc}}}, {"designs", rows}};
    write_file(dir / "fig5-block-convergence.json",
               summary("fig5-block-convergence", o, ref::kWideMaxEnergy, results, checks).dump(2) + "\n");
    return kExitOk;
}

int preset_fig6(const Options& base)
{
    const Options o = preset_options(base, ref::kNarrowMaxEnergy);
    Setup s = make_setup(o);
    const fs::path dir = out_dir(o);
    const double sc = info_scale(o);

    // The family cannot reach the corner energy, so the sweep stops below it.
    const auto grid = parse_grid(fmt(ref::kGridLo) + ":" + fmt(ref::kGridStep) + ":9.9");
    const auto rows = baseline_rows(s, o, grid, true);
    write_file(dir / "baselines.csv", baseline_csv(rows, o));

    Solver solver = make_solver(s.channel.get(), o);
    Solution unc = solve(solver.get(), std::numeric_limits<double>::infinity());
    const auto ui = info(unc.get());
    pfs_sg_point peak{};
    check(pfs_sg_peak(s.channel.get(), ref::kGridLo, 9.9, ref::kGridStep, &peak));
    pfs_operating_point huff{};
    check(pfs_huffman_shaping_point(s.channel.get(), peak.lambda, &huff));
    const auto d = ghc_of(pmf_of(unc.get()));
    const auto ghc = op_of(s.channel.get(), probs_of(d.get()));

    Checks checks;
    checks.add("plateau energy", ui.energy, ref::kPlateauEnergy);
    checks.add("plateau capacity", ui.mi, ref::kPlateauCapacity);
    checks.add("sampled-Gaussian peak energy", peak.energy, ref::kSgPeakEnergy);
    checks.add("sampled-Gaussian gap pct", relerr_pct(peak.mi, ui.mi), ref::kSgGapPct);
    checks.add("Huffman-shaping gap pct", relerr_pct(huff.mi, ui.mi), ref::kHuffmanGapPct);
    checks.add("GHC dyadic gap pct", relerr_pct(ghc.mi, ui.mi), ref::kGhcGapPct);
    ordered_json results = {
        {"capacity", {{"energy", ui.energy}, {"mi", ui.mi * sc}}},
        {"sampled_gaussian_peak", {{"energy", peak.energy}, {"mi", peak.mi * sc}, {"lambda", peak.lambda}}},
        {"huffman_shaping", {{"energy", huff.energy}, {"mi", huff.mi * sc}}},
        {"ghc_dyadic", {{"energy", ghc.energy}, {"mi", ghc.mi * sc}}}};
    write_file(dir / "fig6-baselines.json",
               summary("fig6-baselines", o, ref::kNarrowMaxEnergy, results, checks).dump(2) + "\n");
    return kExitOk;
}

int run_preset(const std::string& name, const Options& o)
{
    if (name == "fig4-pmfs")
        return preset_fig4(o);
    if (name == "fig5-operating-points")
        return preset_fig5_points(o);
    if (name == "fig5-block-convergence")
        return preset_fig5_blocks(o);
    if (name == "fig6-baselines")
        return preset_fig6(o);
    usage_error("unknown preset '" + name +
                "' (expected fig4-pmfs, fig5-operating-points, fig5-block-convergence, fig6-baselines)");
}

// ---------------------------------------------------------------- wiring

struct Flags {
    CLI::Option* qam = nullptr;
    CLI::Option* max_energy = nullptr;
    CLI::Option* constellation = nullptr;
    CLI::Option* noise = nullptr;
    CLI::Option* e_bar = nullptr;
    CLI::Option* e_grid = nullptr;
    CLI::Option* n = nullptr;
};

void add_common(CLI::App& app, Options& o, Flags& f)
{
    f.qam = app.add_option("--qam", o.qam, "square QAM order (4, 16, 64, ...)");
    f.max_energy = app.add_option("--max-energy", o.max_energy, "energy of the corner points");
    f.constellation = app.add_option("--constellation", o.constellation_file, "JSON constellation file");
    f.constellation->excludes(f.qam);
    f.qam->excludes(f.constellation);
    f.max_energy->needs(f.qam);
    f.noise = app.add_option("--noise-variance", o.noise_variance, "total complex noise variance")->capture_default_str();
    f.e_bar = app.add_option("--e-bar", o.e_bar, "average power constraint (inf for none)");
    f.e_grid = app.add_option("--e-grid", o.e_grid, "energy grid lo:step:hi");
    f.n = app.add_option("--n", o.n, "block length(s)")->capture_default_str();
    app.add_option("--gh-nodes", o.gh_nodes, "Gauss-Hermite nodes per axis")->capture_default_str();
    app.add_option("--mc-samples", o.mc_samples, "Monte Carlo samples for block quantities")->capture_default_str();
    app.add_option("--seed", o.seed, "Monte Carlo seed")->capture_default_str();
    app.add_option("--tol", o.tol, "KKT residual tolerance")->capture_default_str();
    app.add_option("--out", o.out, "output directory (default: stdout for single results)");
    app.add_option("--units", o.units, "information units")
        ->check(CLI::IsMember({"nats", "bits"}))
        ->capture_default_str();
    app.add_option("--threads", o.threads, "worker thread cap")->check(CLI::Range(1u, 1024u))->capture_default_str();
    app.add_flag("-v,--verbose", g_verbosity, "log to stderr; repeat for more detail");
}

void reject_preset_overrides(const Flags& f)
{
    for (const CLI::Option* opt : {f.qam, f.max_energy, f.constellation, f.noise, f.e_bar, f.e_grid, f.n})
        if (opt && opt->count() > 0)
            usage_error("presets fix the configuration; " + opt->get_name() + " cannot be overridden");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Capacity-achieving input distributions and prefix-free shaping codes"};
    app.require_subcommand(0, 1);
    app.set_version_flag("--version", pfs_version());

    Options o;
    Flags top;
    add_common(app, o, top);
    app.add_option("--preset", o.preset, "run a reproduction preset");

    Flags fs_solve;
    auto* solve_cmd = app.add_subcommand("solve", "capacity-achieving PMF at --e-bar, or C(E) over --e-grid");
    add_common(*solve_cmd, o, fs_solve);

    Flags fs_ghc;
    GhcOptions g;
    auto* ghc_cmd = app.add_subcommand("ghc", "dyadic approximation and prefix code of a PMF");
    add_common(*ghc_cmd, o, fs_ghc);
    ghc_cmd->add_option("--pmf", g.pmf_file, "JSON array (or solve output); '-' for stdin");
    ghc_cmd->add_option("--method", g.method, "ghc, huffman or bruteforce")
        ->check(CLI::IsMember({"ghc", "huffman", "bruteforce"}))
        ->capture_default_str();
    ghc_cmd->add_option("--max-len", g.max_len, "longest codeword for bruteforce")->capture_default_str();

    CodecOptions codec;
    auto* enc_cmd = app.add_subcommand("encode", "parse a bit stream into signal point indices");
    enc_cmd->add_option("--code", codec.code_file, "JSON lengths (or ghc output)")->required();
    enc_cmd->add_option("--input", codec.input, "ASCII 0/1 file, '-' for stdin")->capture_default_str();
    enc_cmd->add_option("--output", codec.output, "index file, '-' for stdout")->capture_default_str();
    auto* dec_cmd = app.add_subcommand("decode", "map signal point indices back to bits");
    dec_cmd->add_option("--code", codec.code_file, "JSON lengths (or ghc output)")->required();
    dec_cmd->add_option("--input", codec.input, "index file, '-' for stdin")->capture_default_str();
    dec_cmd->add_option("--output", codec.output, "ASCII 0/1 file, '-' for stdout")->capture_default_str();
    enc_cmd->add_flag("-v,--verbose", g_verbosity, "log to stderr");
    dec_cmd->add_flag("-v,--verbose", g_verbosity, "log to stderr");

    Flags fs_block;
    auto* block_cmd = app.add_subcommand("block", "GHC design for n channel uses");
    add_common(*block_cmd, o, fs_block);

    Flags fs_verify;
    VerifyOptions v;
    auto* verify_cmd = app.add_subcommand("verify", "KKT, slope and design-identity residuals");
    add_common(*verify_cmd, o, fs_verify);
    verify_cmd->add_option("--random", v.random, "extra random PMFs on supp(p*)")->capture_default_str();
    verify_cmd->add_option("--slope-delta", v.slope_delta, "half-width of the central difference")
        ->capture_default_str();

    Flags fs_base;
    auto* base_cmd = app.add_subcommand("baseline", "C(E), sampled-Gaussian and dyadic curves as CSV");
    add_common(*base_cmd, o, fs_base);

    Flags fs_preset;
    std::string preset_name;
    auto* preset_cmd = app.add_subcommand("preset", "run a reproduction preset");
    add_common(*preset_cmd, o, fs_preset);
    preset_cmd->add_option("name", preset_name, "preset name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*preset_cmd || !o.preset.empty()) {
            if (*preset_cmd && !o.preset.empty() && o.preset != preset_name)
                usage_error("conflicting preset names");
            for (const Flags* f : {&top, &fs_preset})
                reject_preset_overrides(*f);
            return run_preset(*preset_cmd ? preset_name : o.preset, o);
        }
        if (*solve_cmd)
            return cmd_solve(o);
        if (*ghc_cmd)
            return cmd_ghc(o, g);
        if (*enc_cmd)
            return cmd_encode(codec);
        if (*dec_cmd)
            return cmd_decode(codec);
        if (*block_cmd)
            return cmd_block(o);
        if (*verify_cmd)
            return cmd_verify(o, v);
        if (*base_cmd)
            return cmd_baseline(o);
        std::cerr << app.help();
        return kExitUsage;
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCompute;
    }
}
