#ifndef PMGT_H
#define PMGT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PmgtStatus {
  PMGT_STATUS_OK = 0,
  PMGT_STATUS_NULL_POINTER = 1,
  PMGT_STATUS_INVALID_ARGUMENT = 2,
  PMGT_STATUS_DIMENSION_MISMATCH = 3,
  PMGT_STATUS_DOMAIN = 4,
  PMGT_STATUS_IO = 5,
  PMGT_STATUS_PARSE = 6,
  PMGT_STATUS_CONFIG = 7,
  PMGT_STATUS_UNSUPPORTED = 8,
  PMGT_STATUS_NUMERICAL = 9,
  PMGT_STATUS_PANIC = 10,
} PmgtStatus;

typedef enum PmgtSolver {
  PMGT_SOLVER_KATYUSHAX = 0,
  PMGT_SOLVER_SVRG = 1,
  PMGT_SOLVER_CENTRALIZED_SVRG = 2,
  PMGT_SOLVER_PGEXTRA = 3,
  PMGT_SOLVER_NIDS = 4,
} PmgtSolver;

/**
 * Opaque gossip matrix.
 */
typedef struct PmgtGossip PmgtGossip;

/**
 * Opaque problem instance.
 */
typedef struct PmgtProblem PmgtProblem;

/**
 * Opaque solver trace.
 */
typedef struct PmgtTrace PmgtTrace;

typedef struct PmgtConstants {
  double l_smooth;
  double ell1;
  double ell2;
  double sigma_f;
  /**
   * `sigma_f + sigma_psi`.
   */
  double sigma;
  double kappa;
} PmgtConstants;

/**
 * Run options. Zero (or negative) values of `batch`, `eta`, `tau`,
 * `step` and a negative `rounds` select the default rule.
 */
typedef struct PmgtSolverOptions {
  size_t epochs;
  uint64_t seed;
  size_t batch;
  double eta;
  double tau;
  int64_t rounds;
  double rho_target;
  /**
   * Step of the full-gradient baselines.
   */
  double step;
  /**
   * Stop once the suboptimality reaches this value (ignored if <= 0).
   */
  double stop_below;
} PmgtSolverOptions;

typedef struct PmgtTraceRow {
  size_t epoch;
  uint64_t sfo;
  uint64_t comm;
  double objective;
  /**
   * NaN when no reference optimum is known.
   */
  double subopt;
  double consensus;
} PmgtTraceRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread ("" if none). The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *pmgt_last_error(void);

/**
 * Lazy ring on `m` agents with self-weight `laziness`.
 */
enum PmgtStatus pmgt_gossip_lazy_ring(size_t m, double laziness, struct PmgtGossip **out);

/**
 * Ring plus a seeded random matching, Metropolis weights, lazified.
 */
enum PmgtStatus pmgt_gossip_random_two_neighbor(size_t m, uint64_t seed, struct PmgtGossip **out);

/**
 * `weights` is row-major `m x m`.
 */
enum PmgtStatus pmgt_gossip_from_weights(size_t m, const double *weights, struct PmgtGossip **out);

/**
 * Number of agents, or 0 for a null handle.
 */
size_t pmgt_gossip_agents(const struct PmgtGossip *g);

/**
 * Second largest eigenvalue, or NaN for a null handle.
 */
double pmgt_gossip_lambda2(const struct PmgtGossip *g);

void pmgt_gossip_free(struct PmgtGossip *g);

/**
 * Accelerated mixing of the row-major `m x cols` block `x` into `out`
 * (which may alias `x`).
 */
enum PmgtStatus pmgt_fast_mix(const struct PmgtGossip *g,
                              const double *x,
                              size_t cols,
                              size_t rounds,
                              double *out);

enum PmgtStatus pmgt_contraction_bound(double lambda2, size_t rounds, double *out);

enum PmgtStatus pmgt_min_rounds_for_rho(double lambda2, double rho_target, size_t *out);

/**
 * Shift-and-invert instance on a seeded +-1 Bernoulli `rows x cols` matrix
 * split across `m` agents, with no regularizer.
 */
enum PmgtStatus pmgt_problem_bernoulli(size_t rows,
                                       size_t cols,
                                       uint64_t data_seed,
                                       size_t m,
                                       double r,
                                       uint64_t linear_seed,
                                       struct PmgtProblem **out);

/**
 * Same from a LIBSVM file. `max_rows` and `d_cap` of 0 mean "no limit";
 * rows beyond a multiple of `m` are dropped.
 */
enum PmgtStatus pmgt_problem_libsvm(const char *path,
                                    size_t max_rows,
                                    size_t d_cap,
                                    size_t m,
                                    double r,
                                    uint64_t linear_seed,
                                    struct PmgtProblem **out);

/**
 * New instance with `(eps_f / 2) |x|^2` added to the regularizer.
 */
enum PmgtStatus pmgt_problem_regularize(const struct PmgtProblem *p,
                                        double eps_f,
                                        struct PmgtProblem **out);

enum PmgtStatus pmgt_problem_dims(const struct PmgtProblem *p, size_t *m, size_t *n, size_t *d);

enum PmgtStatus pmgt_problem_constants(const struct PmgtProblem *p, struct PmgtConstants *out);

/**
 * `F(x)` for a point of length `d`.
 */
enum PmgtStatus pmgt_problem_objective(const struct PmgtProblem *p, const double *x, double *out);

/**
 * Writes the exact minimizer (length `d`) into `out`.
 */
enum PmgtStatus pmgt_problem_minimizer(const struct PmgtProblem *p, double *out);

void pmgt_problem_free(struct PmgtProblem *p);

struct PmgtSolverOptions pmgt_solver_options_default(void);

/**
 * Runs `solver` on `problem`. `gossip` may be null for the centralized
 * solver. `options` may be null for the defaults.
 */
enum PmgtStatus pmgt_run_solver(const struct PmgtProblem *problem,
                                const struct PmgtGossip *gossip,
                                enum PmgtSolver solver,
                                const struct PmgtSolverOptions *options,
                                struct PmgtTrace **out);

/**
 * Number of rows (initial point included), or 0 for a null handle.
 */
size_t pmgt_trace_len(const struct PmgtTrace *t);

enum PmgtStatus pmgt_trace_row(const struct PmgtTrace *t, size_t index, struct PmgtTraceRow *out);

/**
 * Reference optimum, or NaN when unknown.
 */
double pmgt_trace_f_star(const struct PmgtTrace *t);

/**
 * Copies the final network-average iterate into `out` (`len` doubles,
 * which must equal the problem dimension).
 */
enum PmgtStatus pmgt_trace_solution(const struct PmgtTrace *t, double *out, size_t len);

enum PmgtStatus pmgt_trace_write_csv(const struct PmgtTrace *t,
                                     const char *path,
                                     double comm_weight);

void pmgt_trace_free(struct PmgtTrace *t);

/**
 * Runs a JSON experiment config. A non-null `out_dir` overrides the
 * config's output directory.
 */
enum PmgtStatus pmgt_run_experiment_json(const char *json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PMGT_H */
