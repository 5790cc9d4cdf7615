#ifndef PFSHAPE_PFSHAPE_H
#define PFSHAPE_PFSHAPE_H

/* C interface to the shaping library. Every function returns a pfs_status;
 * on failure pfs_last_error() describes the cause for the calling thread.
 * Objects are opaque handles released with the matching *_free function
 * (passing NULL is a no-op). Arrays written by the library go into caller
 * buffers whose capacity is passed alongside; when too small the call fails
 * with PFS_ERR_BUFFER and *out_len holds the required count.
 * Information quantities are in nats. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PFSHAPE_BUILDING)
#    define PFS_API __declspec(dllexport)
#  else
#    define PFS_API __declspec(dllimport)
#  endif
#else
#  define PFS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pfs_status {
    PFS_OK = 0,
    PFS_ERR_INVALID_ARGUMENT = 1,
    PFS_ERR_INVALID_ORDER = 2,
    PFS_ERR_INVALID_SCALE = 3,
    PFS_ERR_INVALID_INPUT = 4,
    PFS_ERR_INFEASIBLE = 5,
    PFS_ERR_CONVERGENCE = 6,
    PFS_ERR_BLOCK_TOO_LARGE = 7,
    PFS_ERR_SEARCH_SPACE = 8,
    PFS_ERR_NOT_FULL_CODE = 9,
    PFS_ERR_INVALID_SYMBOL = 10,
    PFS_ERR_IO = 11,
    PFS_ERR_BUFFER = 12,
    PFS_ERR_INTERNAL = 13
} pfs_status;

typedef struct pfs_constellation pfs_constellation;
typedef struct pfs_channel pfs_channel;
typedef struct pfs_solver pfs_solver;
typedef struct pfs_solution pfs_solution;
typedef struct pfs_dyadic pfs_dyadic;
typedef struct pfs_code pfs_code;
typedef struct pfs_block pfs_block;

/* Fraction in [0, 1], reported in 10% steps. */
typedef void (*pfs_progress_fn)(double fraction, void* user);

PFS_API const char* pfs_last_error(void);
PFS_API const char* pfs_status_string(pfs_status status);
PFS_API const char* pfs_version(void);

/* ---- constellations ---- */

PFS_API pfs_status pfs_constellation_qam(int order, double max_energy, pfs_constellation** out);
/* re and im hold m coordinates each. */
PFS_API pfs_status pfs_constellation_from_points(const double* re, const double* im, size_t m,
                                                 pfs_constellation** out);
PFS_API pfs_status pfs_constellation_load(const char* path, pfs_constellation** out);
PFS_API void pfs_constellation_free(pfs_constellation* c);
PFS_API size_t pfs_constellation_size(const pfs_constellation* c);
PFS_API pfs_status pfs_constellation_point(const pfs_constellation* c, size_t i, double* re, double* im);
PFS_API pfs_status pfs_constellation_energies(const pfs_constellation* c, double* out, size_t cap, size_t* out_len);

/* ---- channel: constellation + noise + quadrature ---- */

typedef struct pfs_quadrature {
    int nodes_per_axis;     /* Gauss-Hermite nodes per real dimension */
    uint64_t mc_samples;    /* block Monte Carlo samples */
    uint64_t seed;
    unsigned threads;
} pfs_quadrature;

/* nodes 48, 10^6 samples, seed 0, one thread. */
PFS_API pfs_quadrature pfs_quadrature_default(void);

/* Copies the constellation; the handle may be freed afterwards. */
PFS_API pfs_status pfs_channel_create(const pfs_constellation* c, double noise_variance,
                                      const pfs_quadrature* quad, pfs_channel** out);
PFS_API void pfs_channel_free(pfs_channel* ch);
PFS_API size_t pfs_channel_size(const pfs_channel* ch);

PFS_API pfs_status pfs_mutual_information(const pfs_channel* ch, const double* p, size_t m, double* out);
PFS_API pfs_status pfs_gradient(const pfs_channel* ch, const double* p, size_t m, double* out);
PFS_API pfs_status pfs_output_kl(const pfs_channel* ch, const double* p1, const double* p2, size_t m,
                                 double* out);

/* ---- capacity ---- */

typedef struct pfs_solver_options {
    double tol;
    int max_inner_iterations;
    int max_outer_iterations;
} pfs_solver_options;

PFS_API pfs_solver_options pfs_solver_options_default(void);

/* The solver keeps a reference to the channel, which must outlive it. */
PFS_API pfs_status pfs_solver_create(const pfs_channel* ch, const pfs_solver_options* opts, pfs_solver** out);
PFS_API void pfs_solver_free(pfs_solver* s);
/* e_bar may be INFINITY. */
PFS_API pfs_status pfs_solve(pfs_solver* s, double e_bar, pfs_solution** out);

typedef struct pfs_solution_info {
    double nu;
    double lambda;
    double energy;
    double mi;
    double kkt_residual;
    double e_bar;
    int power_constraint_active;
} pfs_solution_info;

PFS_API void pfs_solution_free(pfs_solution* sol);
PFS_API pfs_status pfs_solution_get_info(const pfs_solution* sol, pfs_solution_info* out);
PFS_API pfs_status pfs_solution_pmf(const pfs_solution* sol, double* out, size_t cap, size_t* out_len);

typedef struct pfs_curve_point {
    double energy;
    double capacity;
    double nu;
    int constraint_active;
} pfs_curve_point;

/* out holds n points. On failure *failed_index names the grid point. */
PFS_API pfs_status pfs_capacity_curve(const pfs_channel* ch, const double* grid, size_t n, double tol,
                                      pfs_curve_point* out, size_t* failed_index);
PFS_API int pfs_curve_is_concave(const pfs_curve_point* curve, size_t n, double slack);

/* ---- dyadic PMFs and prefix codes ---- */

#define PFS_EXCLUDED (-1)

PFS_API pfs_status pfs_ghc(const double* p, size_t m, pfs_dyadic** out);
PFS_API pfs_status pfs_ghc_bruteforce(const double* p, size_t m, int max_len, pfs_dyadic** out);
PFS_API pfs_status pfs_huffman(const double* p, size_t m, pfs_dyadic** out);
/* Excluded symbols carry PFS_EXCLUDED. Fails with NOT_FULL_CODE unless the
 * Kraft sum is exactly one. */
PFS_API pfs_status pfs_dyadic_from_lengths(const int* lengths, size_t m, pfs_dyadic** out);
PFS_API void pfs_dyadic_free(pfs_dyadic* d);
PFS_API size_t pfs_dyadic_size(const pfs_dyadic* d);
PFS_API pfs_status pfs_dyadic_lengths(const pfs_dyadic* d, int* out, size_t cap, size_t* out_len);
PFS_API pfs_status pfs_dyadic_probs(const pfs_dyadic* d, double* out, size_t cap, size_t* out_len);
PFS_API int pfs_kraft_equality(const int* lengths, size_t m);

/* D(d || p) in nats; +INFINITY on a support violation. */
PFS_API pfs_status pfs_kl(const double* d, const double* p, size_t m, double* out);

PFS_API pfs_status pfs_code_create(const pfs_dyadic* d, pfs_code** out);
PFS_API void pfs_code_free(pfs_code* code);
/* NUL-terminated codeword copied into buf (cap includes the terminator). */
PFS_API pfs_status pfs_code_word(const pfs_code* code, size_t symbol, char* buf, size_t cap, size_t* out_len);
/* bits (0/1 bytes) -> symbols. A trailing partial word is dropped. */
PFS_API pfs_status pfs_code_encode(const pfs_code* code, const uint8_t* bits, size_t nbits, size_t* out,
                                   size_t cap, size_t* out_len);
/* symbols -> bits. */
PFS_API pfs_status pfs_code_decode(const pfs_code* code, const size_t* symbols, size_t nsym, uint8_t* out,
                                   size_t cap, size_t* out_len);

/* ---- block shaping and analysis ---- */

typedef struct pfs_block_info {
    int n;
    double per_symbol_energy;
    double per_symbol_mi;
    double per_symbol_mi_stderr;
    double per_symbol_kl;
    size_t joint_size;
} pfs_block_info;

PFS_API pfs_status pfs_design_block(const pfs_channel* ch, const pfs_solution* sol, int n, pfs_progress_fn progress,
                                    void* user, pfs_block** out);
PFS_API void pfs_block_free(pfs_block* b);
PFS_API pfs_status pfs_block_get_info(const pfs_block* b, pfs_block_info* out);
/* Joint lengths over m^n tuples, base-m index with the first use most significant. */
PFS_API pfs_status pfs_block_lengths(const pfs_block* b, int* out, size_t cap, size_t* out_len);

typedef struct pfs_operating_point {
    double energy;
    double mi;
} pfs_operating_point;

PFS_API pfs_status pfs_operating_point_of(const pfs_channel* ch, const double* p, size_t m,
                                          pfs_operating_point* out);
/* (approx - target) / approx */
PFS_API double pfs_relative_error(double approx, double target);

typedef struct pfs_prop1_report {
    double residual;
    double tolerance;
    int support_condition;
    int within_tolerance;
    double e_tilde;
    double i_tilde;
    double e_star;
    double i_star;
    double nu;
    double output_kl;
} pfs_prop1_report;

PFS_API pfs_status pfs_prop1(const pfs_channel* ch, const double* p_tilde, size_t m, const pfs_solution* sol,
                             pfs_prop1_report* out);
PFS_API pfs_status pfs_block_prop1(const pfs_channel* ch, const pfs_solution* sol, const pfs_block* b,
                                   pfs_progress_fn progress, void* user, pfs_prop1_report* out);

typedef struct pfs_slope_report {
    double nu;
    double central_difference;
    double relative_mismatch;
    int constraint_active;
    int defined;
} pfs_slope_report;

PFS_API pfs_status pfs_slope_consistency(pfs_solver* s, const pfs_solution* sol, double delta,
                                         pfs_slope_report* out);

/* ---- sampled-Gaussian baseline ---- */

PFS_API pfs_status pfs_sg_pmf(const pfs_constellation* c, double lambda, double* out, size_t m);
PFS_API pfs_status pfs_sg_lambda(const pfs_constellation* c, double energy, double* out);

typedef struct pfs_sg_point {
    double lambda;
    double energy;
    double mi;
} pfs_sg_point;

PFS_API pfs_status pfs_sg_curve(const pfs_channel* ch, const double* grid, size_t n, pfs_sg_point* out);
PFS_API pfs_status pfs_sg_peak(const pfs_channel* ch, double lo, double hi, double step, pfs_sg_point* out);
PFS_API pfs_status pfs_huffman_shaping_point(const pfs_channel* ch, double lambda, pfs_operating_point* out);
PFS_API int pfs_is_monotone_in_energy(const double* p, const double* energies, size_t m, double tol);

#ifdef __cplusplus
}
#endif

#endif
