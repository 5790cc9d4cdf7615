#include "pfshape/pfshape.h"

#include "pfshape/analysis.hpp"
#include "pfshape/baselines.hpp"
#include "pfshape/block_shaper.hpp"
#include "pfshape/capacity_solver.hpp"
#include "pfshape/constellation.hpp"
#include "pfshape/dyadic.hpp"
#include "pfshape/error.hpp"
#include "pfshape/mi_engine.hpp"

#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

using namespace pfshape;

struct pfs_constellation {
    Constellation c;
};

struct pfs_channel {
    MiEngine engine;
    // Lazily built on the first prop1 call; holds a finer quadrature grid.
    mutable std::unique_ptr<CheckedEngine> checked;
};

struct pfs_solver {
    CapacitySolver solver;
};

struct pfs_solution {
    CapacitySolution s;
};

struct pfs_dyadic {
    DyadicPmf d;
};

struct pfs_code {
    PrefixCode code;
};

struct pfs_block {
    BlockDesign design;
};

namespace {

thread_local std::string g_last_error;

pfs_status map(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return PFS_ERR_INVALID_ARGUMENT;
    case ErrorCode::InvalidOrder: return PFS_ERR_INVALID_ORDER;
    case ErrorCode::InvalidScale: return PFS_ERR_INVALID_SCALE;
    case ErrorCode::InvalidInput: return PFS_ERR_INVALID_INPUT;
    case ErrorCode::Infeasible: return PFS_ERR_INFEASIBLE;
    case ErrorCode::Convergence: return PFS_ERR_CONVERGENCE;
    case ErrorCode::BlockTooLarge: return PFS_ERR_BLOCK_TOO_LARGE;
    case ErrorCode::SearchSpaceTooLarge: return PFS_ERR_SEARCH_SPACE;
    case ErrorCode::NotFullCode: return PFS_ERR_NOT_FULL_CODE;
    case ErrorCode::InvalidSymbol: return PFS_ERR_INVALID_SYMBOL;
    case ErrorCode::Io: return PFS_ERR_IO;
    }
    return PFS_ERR_INTERNAL;
}

pfs_status fail(pfs_status st, std::string msg)
{
    g_last_error = std::move(msg);
    return st;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
pfs_status guarded(Fn&& fn) noexcept
{
    try {
        g_last_error.clear();
        return fn();
    } catch (const Error& e) {
        return fail(map(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(PFS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PFS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PFS_ERR_INTERNAL, "unknown exception");
    }
}

#define PFS_REQUIRE(cond)                                                     \
    do {                                                                      \
        if (!(cond))                                                          \
            return fail(PFS_ERR_INVALID_ARGUMENT, "null or invalid argument: " #cond); \
    } while (0)

template <class T, class U>
pfs_status copy_out(const std::vector<U>& src, T* out, size_t cap, size_t* out_len)
{
    if (out_len)
        *out_len = src.size();
    if (src.size() > cap)
        return fail(PFS_ERR_BUFFER, "output buffer holds " + std::to_string(cap) + " entries, need " +
                                        std::to_string(src.size()));
    if (!src.empty() && !out)
        return fail(PFS_ERR_INVALID_ARGUMENT, "null output buffer");
    for (size_t i = 0; i < src.size(); ++i)
        out[i] = static_cast<T>(src[i]);
    return PFS_OK;
}

std::span<const double> view(const double* p, size_t m) { return {p, m}; }

ProgressFn wrap(pfs_progress_fn fn, void* user)
{
    if (!fn)
        return {};
    return [fn, user](double f) { fn(f, user); };
}

void fill(const Prop1Report& r, pfs_prop1_report* out)
{
    out->residual = r.residual;
    out->tolerance = r.tolerance;
    out->support_condition = r.support_condition ? 1 : 0;
    out->within_tolerance = r.within_tolerance ? 1 : 0;
    out->e_tilde = r.e_tilde;
    out->i_tilde = r.i_tilde;
    out->e_star = r.e_star;
    out->i_star = r.i_star;
    out->nu = r.nu;
    out->output_kl = r.output_kl;
}

} // namespace

extern "C" {

const char* pfs_last_error(void) { return g_last_error.c_str(); }

const char* pfs_status_string(pfs_status status)
{
    switch (status) {
    case PFS_OK: return "ok";
    case PFS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PFS_ERR_INVALID_ORDER: return "invalid order";
    case PFS_ERR_INVALID_SCALE: return "invalid scale";
    case PFS_ERR_INVALID_INPUT: return "invalid input";
    case PFS_ERR_INFEASIBLE: return "infeasible";
    case PFS_ERR_CONVERGENCE: return "no convergence";
    case PFS_ERR_BLOCK_TOO_LARGE: return "block too large";
    case PFS_ERR_SEARCH_SPACE: return "search space too large";
    case PFS_ERR_NOT_FULL_CODE: return "not a full code";
    case PFS_ERR_INVALID_SYMBOL: return "invalid symbol";
    case PFS_ERR_IO: return "i/o error";
    case PFS_ERR_BUFFER: return "buffer too small";
    case PFS_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* pfs_version(void) { return "0.1.0"; }

pfs_status pfs_constellation_qam(int order, double max_energy, pfs_constellation** out)
{
    PFS_REQUIRE(out);
    return guarded([&] {
        *out = new pfs_constellation{make_square_qam(order, max_energy)};
        return PFS_OK;
    });
}

pfs_status pfs_constellation_from_points(const double* re, const double* im, size_t m, pfs_constellation** out)
{
    PFS_REQUIRE(out && (m == 0 || (re && im)));
    return guarded([&] {
        std::vector<Complex> pts(m);
        for (size_t i = 0; i < m; ++i)
            pts[i] = {re[i], im[i]};
        *out = new pfs_constellation{Constellation(std::move(pts))};
        return PFS_OK;
    });
}

pfs_status pfs_constellation_load(const char* path, pfs_constellation** out)
{
    PFS_REQUIRE(path && out);
    return guarded([&] {
        *out = new pfs_constellation{load_constellation(path)};
        return PFS_OK;
    });
}

void pfs_constellation_free(pfs_constellation* c) { delete c; }

size_t pfs_constellation_size(const pfs_constellation* c) { return c ? c->c.size() : 0; }

pfs_status pfs_constellation_point(const pfs_constellation* c, size_t i, double* re, double* im)
{
    PFS_REQUIRE(c && re && im);
    if (i >= c->c.size())
        return fail(PFS_ERR_INVALID_SYMBOL, "point index out of range");
    *re = c->c.point(i).real();
    *im = c->c.point(i).imag();
    return PFS_OK;
}

pfs_status pfs_constellation_energies(const pfs_constellation* c, double* out, size_t cap, size_t* out_len)
{
    PFS_REQUIRE(c);
    const auto e = c->c.energies();
    return copy_out(std::vector<double>(e.begin(), e.end()), out, cap, out_len);
}

pfs_quadrature pfs_quadrature_default(void)
{
    const QuadratureSpec q;
    return {q.nodes_per_axis, q.mc_samples, q.seed, q.threads};
}

pfs_status pfs_channel_create(const pfs_constellation* c, double noise_variance, const pfs_quadrature* quad,
                              pfs_channel** out)
{
    PFS_REQUIRE(c && out);
    return guarded([&] {
        QuadratureSpec q;
        if (quad) {
            q.nodes_per_axis = quad->nodes_per_axis;
            q.mc_samples = quad->mc_samples;
            q.seed = quad->seed;
            q.threads = quad->threads;
        }
        *out = new pfs_channel{MiEngine(c->c, NoiseModel{noise_variance}, q), nullptr};
        return PFS_OK;
    });
}

void pfs_channel_free(pfs_channel* ch) { delete ch; }

size_t pfs_channel_size(const pfs_channel* ch) { return ch ? ch->engine.size() : 0; }

pfs_status pfs_mutual_information(const pfs_channel* ch, const double* p, size_t m, double* out)
{
    PFS_REQUIRE(ch && p && out);
    return guarded([&] {
        *out = ch->engine.mutual_information(view(p, m));
        return PFS_OK;
    });
}

pfs_status pfs_gradient(const pfs_channel* ch, const double* p, size_t m, double* out)
{
    PFS_REQUIRE(ch && p && out);
    return guarded([&] {
        const auto g = ch->engine.gradient(view(p, m));
        std::copy(g.begin(), g.end(), out);
        return PFS_OK;
    });
}

pfs_status pfs_output_kl(const pfs_channel* ch, const double* p1, const double* p2, size_t m, double* out)
{
    PFS_REQUIRE(ch && p1 && p2 && out);
    return guarded([&] {
        *out = ch->engine.output_kl(view(p1, m), view(p2, m));
        return PFS_OK;
    });
}

pfs_solver_options pfs_solver_options_default(void)
{
    const SolverOptions o;
    return {o.tol, o.max_inner_iterations, o.max_outer_iterations};
}

pfs_status pfs_solver_create(const pfs_channel* ch, const pfs_solver_options* opts, pfs_solver** out)
{
    PFS_REQUIRE(ch && out);
    return guarded([&] {
        SolverOptions o;
        if (opts) {
            o.tol = opts->tol;
            o.max_inner_iterations = opts->max_inner_iterations;
            o.max_outer_iterations = opts->max_outer_iterations;
        }
        if (!(o.tol > 0.0) || o.max_inner_iterations <= 0 || o.max_outer_iterations <= 0)
            throw Error(ErrorCode::InvalidArgument, "solver options must be positive");
        *out = new pfs_solver{CapacitySolver(ch->engine, o)};
        return PFS_OK;
    });
}

void pfs_solver_free(pfs_solver* s) { delete s; }

pfs_status pfs_solve(pfs_solver* s, double e_bar, pfs_solution** out)
{
    PFS_REQUIRE(s && out);
    return guarded([&] {
        *out = new pfs_solution{s->solver.solve(e_bar)};
        return PFS_OK;
    });
}

void pfs_solution_free(pfs_solution* sol) { delete sol; }

pfs_status pfs_solution_get_info(const pfs_solution* sol, pfs_solution_info* out)
{
    PFS_REQUIRE(sol && out);
    const auto& s = sol->s;
    *out = {s.nu, s.lambda, s.energy, s.mi, s.kkt_residual, s.e_bar, s.power_constraint_active ? 1 : 0};
    return PFS_OK;
}

pfs_status pfs_solution_pmf(const pfs_solution* sol, double* out, size_t cap, size_t* out_len)
{
    PFS_REQUIRE(sol);
    return copy_out(sol->s.pmf, out, cap, out_len);
}

pfs_status pfs_capacity_curve(const pfs_channel* ch, const double* grid, size_t n, double tol,
                              pfs_curve_point* out, size_t* failed_index)
{
    PFS_REQUIRE(ch && (n == 0 || (grid && out)));
    return guarded([&] {
        SolverOptions o;
        o.tol = tol;
        CapacitySolver solver(ch->engine, o);
        for (size_t g = 0; g < n; ++g) {
            try {
                const auto sol = solver.solve(grid[g]);
                out[g] = {grid[g], sol.mi, sol.nu, sol.power_constraint_active ? 1 : 0};
            } catch (const Error& e) {
                if (failed_index)
                    *failed_index = g;
                return fail(map(e.code()), "grid index " + std::to_string(g) + ": " + e.what());
            }
        }
        return PFS_OK;
    });
}

int pfs_curve_is_concave(const pfs_curve_point* curve, size_t n, double slack)
{
    if (!curve)
        return n == 0;
    std::vector<CapacityCurvePoint> pts(n);
    for (size_t i = 0; i < n; ++i)
        pts[i] = {curve[i].energy, curve[i].capacity, curve[i].nu, curve[i].constraint_active != 0};
    return curve_is_concave(pts, slack) ? 1 : 0;
}

pfs_status pfs_ghc(const double* p, size_t m, pfs_dyadic** out)
{
    PFS_REQUIRE(p && out);
    return guarded([&] {
        *out = new pfs_dyadic{ghc(view(p, m))};
        return PFS_OK;
    });
}

pfs_status pfs_ghc_bruteforce(const double* p, size_t m, int max_len, pfs_dyadic** out)
{
    PFS_REQUIRE(p && out);
    return guarded([&] {
        *out = new pfs_dyadic{ghc_bruteforce(view(p, m), max_len)};
        return PFS_OK;
    });
}

pfs_status pfs_huffman(const double* p, size_t m, pfs_dyadic** out)
{
    PFS_REQUIRE(p && out);
    return guarded([&] {
        *out = new pfs_dyadic{huffman_lengths(view(p, m))};
        return PFS_OK;
    });
}

pfs_status pfs_dyadic_from_lengths(const int* lengths, size_t m, pfs_dyadic** out)
{
    PFS_REQUIRE(lengths && out);
    return guarded([&] {
        *out = new pfs_dyadic{DyadicPmf(std::vector<int>(lengths, lengths + m))};
        return PFS_OK;
    });
}

void pfs_dyadic_free(pfs_dyadic* d) { delete d; }

size_t pfs_dyadic_size(const pfs_dyadic* d) { return d ? d->d.size() : 0; }

pfs_status pfs_dyadic_lengths(const pfs_dyadic* d, int* out, size_t cap, size_t* out_len)
{
    PFS_REQUIRE(d);
    const auto l = d->d.lengths();
    return copy_out(std::vector<int>(l.begin(), l.end()), out, cap, out_len);
}

pfs_status pfs_dyadic_probs(const pfs_dyadic* d, double* out, size_t cap, size_t* out_len)
{
    PFS_REQUIRE(d);
    return copy_out(d->d.probs(), out, cap, out_len);
}

int pfs_kraft_equality(const int* lengths, size_t m)
{
    if (!lengths)
        return 0;
    return satisfies_kraft_equality(std::span<const int>(lengths, m)) ? 1 : 0;
}

pfs_status pfs_kl(const double* d, const double* p, size_t m, double* out)
{
    PFS_REQUIRE(d && p && out);
    return guarded([&] {
        *out = kl_pmf(view(d, m), view(p, m));
        return PFS_OK;
    });
}

pfs_status pfs_code_create(const pfs_dyadic* d, pfs_code** out)
{
    PFS_REQUIRE(d && out);
    return guarded([&] {
        *out = new pfs_code{PrefixCode(d->d)};
        return PFS_OK;
    });
}

void pfs_code_free(pfs_code* code) { delete code; }

pfs_status pfs_code_word(const pfs_code* code, size_t symbol, char* buf, size_t cap, size_t* out_len)
{
    PFS_REQUIRE(code);
    return guarded([&] {
        const std::string& w = code->code.codeword(symbol);
        if (out_len)
            *out_len = w.size();
        if (w.size() + 1 > cap || !buf)
            return fail(PFS_ERR_BUFFER, "codeword buffer too small");
        std::memcpy(buf, w.c_str(), w.size() + 1);
        return PFS_OK;
    });
}

pfs_status pfs_code_encode(const pfs_code* code, const uint8_t* bits, size_t nbits, size_t* out, size_t cap,
                           size_t* out_len)
{
    PFS_REQUIRE(code && (nbits == 0 || bits));
    return guarded([&] {
        return copy_out(code->code.encode(std::span<const std::uint8_t>(bits, nbits)), out, cap, out_len);
    });
}

pfs_status pfs_code_decode(const pfs_code* code, const size_t* symbols, size_t nsym, uint8_t* out, size_t cap,
                           size_t* out_len)
{
    PFS_REQUIRE(code && (nsym == 0 || symbols));
    return guarded([&] {
        return copy_out(code->code.decode(std::span<const std::size_t>(symbols, nsym)), out, cap, out_len);
    });
}

pfs_status pfs_design_block(const pfs_channel* ch, const pfs_solution* sol, int n, pfs_progress_fn progress,
                            void* user, pfs_block** out)
{
    PFS_REQUIRE(ch && sol && out);
    return guarded([&] {
        *out = new pfs_block{design_block(ch->engine, sol->s, n, wrap(progress, user))};
        return PFS_OK;
    });
}

void pfs_block_free(pfs_block* b) { delete b; }

pfs_status pfs_block_get_info(const pfs_block* b, pfs_block_info* out)
{
    PFS_REQUIRE(b && out);
    const auto& d = b->design;
    *out = {d.n, d.per_symbol_energy, d.per_symbol_mi, d.per_symbol_mi_stderr, d.per_symbol_kl,
            d.joint_dyadic.size()};
    return PFS_OK;
}

pfs_status pfs_block_lengths(const pfs_block* b, int* out, size_t cap, size_t* out_len)
{
    PFS_REQUIRE(b);
    const auto l = b->design.joint_dyadic.lengths();
    return copy_out(std::vector<int>(l.begin(), l.end()), out, cap, out_len);
}

pfs_status pfs_operating_point_of(const pfs_channel* ch, const double* p, size_t m, pfs_operating_point* out)
{
    PFS_REQUIRE(ch && p && out);
    return guarded([&] {
        const auto op = operating_point(ch->engine, view(p, m));
        *out = {op.energy, op.mi};
        return PFS_OK;
    });
}

double pfs_relative_error(double approx, double target) { return relative_error(approx, target); }

pfs_status pfs_prop1(const pfs_channel* ch, const double* p_tilde, size_t m, const pfs_solution* sol,
                     pfs_prop1_report* out)
{
    PFS_REQUIRE(ch && p_tilde && sol && out);
    return guarded([&] {
        if (!ch->checked)
            ch->checked = std::make_unique<CheckedEngine>(ch->engine);
        fill(prop1_residual(*ch->checked, view(p_tilde, m), sol->s), out);
        return PFS_OK;
    });
}

pfs_status pfs_block_prop1(const pfs_channel* ch, const pfs_solution* sol, const pfs_block* b,
                           pfs_progress_fn progress, void* user, pfs_prop1_report* out)
{
    PFS_REQUIRE(ch && sol && b && out);
    return guarded([&] {
        fill(block_prop1_residual(ch->engine, sol->s, b->design, wrap(progress, user)), out);
        return PFS_OK;
    });
}

pfs_status pfs_slope_consistency(pfs_solver* s, const pfs_solution* sol, double delta, pfs_slope_report* out)
{
    PFS_REQUIRE(s && sol && out);
    return guarded([&] {
        const auto r = slope_consistency(s->solver, sol->s, delta);
        *out = {r.nu, r.central_difference, r.relative_mismatch, r.constraint_active ? 1 : 0, r.defined ? 1 : 0};
        return PFS_OK;
    });
}

pfs_status pfs_sg_pmf(const pfs_constellation* c, double lambda, double* out, size_t m)
{
    PFS_REQUIRE(c && out);
    return guarded([&] {
        if (m != c->c.size())
            throw Error(ErrorCode::InvalidInput, "output length differs from the constellation size");
        const auto p = sampled_gaussian_pmf(c->c, lambda);
        std::copy(p.begin(), p.end(), out);
        return PFS_OK;
    });
}

pfs_status pfs_sg_lambda(const pfs_constellation* c, double energy, double* out)
{
    PFS_REQUIRE(c && out);
    return guarded([&] {
        *out = sampled_gaussian_lambda(c->c, energy);
        return PFS_OK;
    });
}

pfs_status pfs_sg_curve(const pfs_channel* ch, const double* grid, size_t n, pfs_sg_point* out)
{
    PFS_REQUIRE(ch && (n == 0 || (grid && out)));
    return guarded([&] {
        const auto curve = sg_curve(ch->engine, std::span<const double>(grid, n));
        for (size_t i = 0; i < n; ++i)
            out[i] = {curve[i].lambda, curve[i].energy, curve[i].mi};
        return PFS_OK;
    });
}

pfs_status pfs_sg_peak(const pfs_channel* ch, double lo, double hi, double step, pfs_sg_point* out)
{
    PFS_REQUIRE(ch && out);
    return guarded([&] {
        const auto pk = sg_peak(ch->engine, lo, hi, step);
        *out = {pk.lambda, pk.energy, pk.mi};
        return PFS_OK;
    });
}

pfs_status pfs_huffman_shaping_point(const pfs_channel* ch, double lambda, pfs_operating_point* out)
{
    PFS_REQUIRE(ch && out);
    return guarded([&] {
        const auto op = huffman_shaping_point(ch->engine, lambda);
        *out = {op.energy, op.mi};
        return PFS_OK;
    });
}

int pfs_is_monotone_in_energy(const double* p, const double* energies, size_t m, double tol)
{
    if (!p || !energies)
        return 0;
    try {
        return is_monotone_in_energy(view(p, m), view(energies, m), tol) ? 1 : 0;
    } catch (...) {
        return 0;
    }
}

} // extern "C"
