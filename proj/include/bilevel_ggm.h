/*
 * bilevel_ggm: joint estimation of one group-level and K individual-level
 * sparse Gaussian precision matrices by penalized likelihood (a random
 * covariance model), with BIC-based tuning, a simulation-study generator,
 * and edge-recovery metrics.
 *
 * Conventions:
 *   - Matrices are dense double buffers of length p*p; symmetric matrices
 *     may be read in either storage order. Observation matrices are
 *     row-major with one observation per row.
 *   - Edge lists are flat int64 arrays [j0, jp0, j1, jp1, ...] with
 *     0 <= j < jp < p.
 *   - Functions return BGGM_OK on success; on failure the output buffers
 *     are unspecified and bggm_last_error_message() describes the cause.
 *   - Handle destructors accept NULL.
 */

#ifndef BILEVEL_GGM_H
#define BILEVEL_GGM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bggm_status {
  BGGM_OK = 0,
  BGGM_ERR_INVALID_ARGUMENT = 1,
  BGGM_ERR_DIMENSION_MISMATCH = 2,
  BGGM_ERR_DIMENSION_TOO_SMALL = 3,
  BGGM_ERR_NON_FINITE_INPUT = 4,
  BGGM_ERR_NOT_POSITIVE_DEFINITE = 5,
  BGGM_ERR_SINGULAR_SAMPLE = 6,
  BGGM_ERR_INVALID_LAMBDA = 7,
  BGGM_ERR_UNEQUAL_SAMPLE_SIZES = 8,
  BGGM_ERR_EMPTY_FEASIBLE_GRID = 9,
  BGGM_ERR_INTERNAL = 10
} bggm_status;

const char* bggm_status_name(bggm_status status);

/* Message for the most recent failure on this thread. */
const char* bggm_last_error_message(void);

const char* bggm_version(void);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

typedef struct bggm_dataset bggm_dataset;

bggm_status bggm_dataset_create(bggm_dataset** out);
void bggm_dataset_destroy(bggm_dataset* dataset);

/* Adds one subject's n x p observation matrix (row-major). All subjects
 * must share p; the sample covariance is computed and cached. */
bggm_status bggm_dataset_add_subject(bggm_dataset* dataset, const double* observations,
                                     int64_t n, int64_t p);
int64_t bggm_dataset_num_subjects(const bggm_dataset* dataset);
int64_t bggm_dataset_dim(const bggm_dataset* dataset); /* 0 while empty */

/* Centered sample covariance S = Y^T Y / n of one observation matrix. */
bggm_status bggm_sample_covariance(const double* observations, int64_t n, int64_t p,
                                   double* cov_out);

/* ------------------------------------------------------------------ */
/* Single-matrix solvers                                               */

/* Graphical lasso: minimizes -log det(Omega) + tr(S Omega) + lambda *
 * sum_{i != j} |Omega_ij| over positive definite Omega. warm_start may be
 * NULL. iterations/converged/objective outputs may be NULL. */
bggm_status bggm_glasso_fit(const double* s, int64_t p, double lambda, int32_t max_iter,
                            double tol, const double* warm_start, double* omega_out,
                            int32_t* iterations_out, int32_t* converged_out,
                            double* objective_out);

/* Max stationarity violation of the graphical lasso objective at omega. */
bggm_status bggm_glasso_kkt(const double* s, int64_t p, double lambda, const double* omega,
                            double* residual_out);

/* Sparse covariance-side solver: minimizes log det(W) + tr(A W^{-1}) +
 * gamma * sum_{i != j} |W_ij| over positive definite W, starting from init
 * (required for gamma > 0; may be NULL when gamma == 0). */
bggm_status bggm_sparsecov_fit(const double* a, int64_t p, double gamma, int32_t max_iter,
                               double tol, const double* init, double* omega0_out,
                               int32_t* iterations_out, int32_t* converged_out,
                               double* objective_out);

bggm_status bggm_sparsecov_kkt(const double* a, int64_t p, double gamma, const double* omega0,
                               double* residual_out);

/* ------------------------------------------------------------------ */
/* Random covariance model                                             */

#define BGGM_INIT_BLEND 0         /* Omega_k starts at (1-rho) S_k + rho I  */
#define BGGM_INIT_INVERSE_BLEND 1 /* ... or at the inverse of that blend    */

typedef struct bggm_rcm_options {
  int32_t max_bcd_iter;
  double bcd_tol;
  double rho_init;
  int32_t init_mode;
  int32_t glasso_max_iter;
  double glasso_tol;
  int32_t sparsecov_max_iter;
  double sparsecov_tol;
  int32_t threads; /* parallelism budget for per-subject updates; 0 = auto */
} bggm_rcm_options;

void bggm_rcm_options_init(bggm_rcm_options* options);

typedef struct bggm_rcm_fit bggm_rcm_fit;

/* Joint fit of the group precision and one precision per subject by block
 * coordinate descent. lambda1: individual sparsity; lambda2: shrinkage of
 * each individual precision toward the group (Kullback-Leibler penalty);
 * lambda3: group sparsity (requires lambda2 > 0). options may be NULL for
 * defaults. Non-convergence is reported via bggm_rcm_fit_converged, not as
 * an error. */
bggm_status bggm_rcm_fit_create(const bggm_dataset* dataset, double lambda1, double lambda2,
                                double lambda3, const bggm_rcm_options* options,
                                bggm_rcm_fit** out);
void bggm_rcm_fit_destroy(bggm_rcm_fit* fit);

int64_t bggm_rcm_fit_dim(const bggm_rcm_fit* fit);
int64_t bggm_rcm_fit_num_subjects(const bggm_rcm_fit* fit);
int32_t bggm_rcm_fit_iterations(const bggm_rcm_fit* fit);
int32_t bggm_rcm_fit_converged(const bggm_rcm_fit* fit);
/* 0 when lambda2 == 0: the group matrix is then the plain average of the
 * individual estimates rather than a penalized estimate. */
int32_t bggm_rcm_fit_group_estimated(const bggm_rcm_fit* fit);
bggm_status bggm_rcm_fit_lambda(const bggm_rcm_fit* fit, double* lambda1, double* lambda2,
                                double* lambda3);
bggm_status bggm_rcm_fit_group_precision(const bggm_rcm_fit* fit, double* out);
bggm_status bggm_rcm_fit_individual_precision(const bggm_rcm_fit* fit, int64_t k, double* out);
int64_t bggm_rcm_fit_trace_length(const bggm_rcm_fit* fit);
/* Objective value after each block-coordinate-descent iteration;
 * non-increasing. */
bggm_status bggm_rcm_fit_objective_trace(const bggm_rcm_fit* fit, double* out);

/* Max off-diagonal stationarity violations at the fit, per level. The
 * group residual is 0 by definition when lambda2 == 0. */
bggm_status bggm_rcm_fit_kkt(const bggm_rcm_fit* fit, const bggm_dataset* dataset,
                             double* individual_out, double* group_out);

/* sum_k df_k / (1 + lambda2) + lambda2 df_0 / (1 + lambda2), where df
 * counts nonzero off-diagonal pairs. */
double bggm_rcm_fit_degrees_of_freedom(const bggm_rcm_fit* fit);

bggm_status bggm_rcm_fit_bic1(const bggm_rcm_fit* fit, const bggm_dataset* dataset,
                              double* out);
/* Requires equal sample sizes across subjects. */
bggm_status bggm_rcm_fit_bic2(const bggm_rcm_fit* fit, const bggm_dataset* dataset,
                              double* out);

/* ------------------------------------------------------------------ */
/* Tuning                                                              */

#define BGGM_CRITERION_BIC1 1
#define BGGM_CRITERION_BIC2 2

typedef struct bggm_tune_result bggm_tune_result;

/* Grid search over all (lambda1, lambda2, lambda3) combinations, one fit
 * per feasible point, warm-started along descending lambda1 within each
 * (lambda2, lambda3) slice. Combinations with lambda2 == 0 < lambda3 are
 * skipped as infeasible. The best entry minimizes the criterion among
 * converged fits (ties broken toward the sparser model). */
bggm_status bggm_tune(const bggm_dataset* dataset, const double* lambda1_values,
                      int64_t lambda1_count, const double* lambda2_values,
                      int64_t lambda2_count, const double* lambda3_values,
                      int64_t lambda3_count, int32_t criterion,
                      const bggm_rcm_options* options, bggm_tune_result** out);
void bggm_tune_result_destroy(bggm_tune_result* result);

int64_t bggm_tune_result_rows(const bggm_tune_result* result);
/* Rows are sorted by criterion value, best first. Output pointers may be
 * NULL. */
bggm_status bggm_tune_result_row(const bggm_tune_result* result, int64_t row, double* lambda1,
                                 double* lambda2, double* lambda3, double* bic, double* df,
                                 int32_t* converged);
int64_t bggm_tune_result_infeasible_count(const bggm_tune_result* result);
/* Borrowed; valid while the tune result is alive. */
const bggm_rcm_fit* bggm_tune_result_best(const bggm_tune_result* result);

#define BGGM_DEFAULT_GRID_LAMBDA1_COUNT 10
#define BGGM_DEFAULT_GRID_LAMBDA2_COUNT 5
#define BGGM_DEFAULT_GRID_LAMBDA3_COUNT 5

/* Default grid for a p-dimensional problem with n observations per
 * subject. Buffers must hold the counts above. */
bggm_status bggm_default_grid(int64_t p, int64_t n, double* lambda1_out, double* lambda2_out,
                              double* lambda3_out);

/* ------------------------------------------------------------------ */
/* Simulation                                                          */

#define BGGM_GRAPH_SCALE_FREE 0
#define BGGM_GRAPH_ERDOS_RENYI 1
#define BGGM_GRAPH_EXPLICIT 2

typedef struct bggm_sim_options {
  int64_t p;
  int64_t num_subjects;
  int64_t n;
  double rho_diff; /* fraction of group edges toggled per subject */
  int32_t graph_model;
  double er_edge_prob;
  const int64_t* explicit_edges; /* BGGM_GRAPH_EXPLICIT only */
  int64_t explicit_edge_count;
  double value_lo;
  double value_hi;
  uint64_t seed;
} bggm_sim_options;

/* Defaults: p=100, K=8, n=50, rho_diff=0, scale-free graph, values drawn
 * from [-1,-0.5] U [0.5,1], seed=0. */
void bggm_sim_options_init(bggm_sim_options* options);

typedef struct bggm_sim_result bggm_sim_result;

/* Deterministic given the options, including the seed. */
bggm_status bggm_simulate(const bggm_sim_options* options, bggm_sim_result** out);
void bggm_sim_result_destroy(bggm_sim_result* result);

int64_t bggm_sim_result_p(const bggm_sim_result* result);
int64_t bggm_sim_result_num_subjects(const bggm_sim_result* result);
int64_t bggm_sim_result_n(const bggm_sim_result* result);
bggm_status bggm_sim_result_observations(const bggm_sim_result* result, int64_t k,
                                         double* out /* n*p row-major */);
bggm_status bggm_sim_result_group_precision(const bggm_sim_result* result, double* out);
bggm_status bggm_sim_result_individual_precision(const bggm_sim_result* result, int64_t k,
                                                 double* out);
int64_t bggm_sim_result_group_edge_count(const bggm_sim_result* result);
bggm_status bggm_sim_result_group_edges(const bggm_sim_result* result, int64_t* out);
int64_t bggm_sim_result_individual_edge_count(const bggm_sim_result* result, int64_t k);
bggm_status bggm_sim_result_individual_edges(const bggm_sim_result* result, int64_t k,
                                             int64_t* out);

/* ------------------------------------------------------------------ */
/* Metrics                                                             */

/* Off-diagonal pairs with |omega_ij| > eps. edges_out must hold
 * p(p-1) entries (2 per possible edge); pass eps <= 0 for the default
 * threshold 1e-8. */
bggm_status bggm_edges_from_precision(const double* omega, int64_t p, double eps,
                                      int64_t* edges_out, int64_t* count_out);

/* Confusion over all p(p-1)/2 unordered pairs. Output pointers may be
 * NULL. Rates are 0 when their denominator is empty. */
bggm_status bggm_edge_confusion(int64_t p, const int64_t* estimated_edges,
                                int64_t estimated_count, const int64_t* truth_edges,
                                int64_t truth_count, double* tpr, double* fpr, int64_t* tp,
                                int64_t* fp, int64_t* tn, int64_t* fn);

/* Frobenius and entrywise L1 norms of estimate - truth (diagonal included
 * unless offdiag_only is nonzero). */
bggm_status bggm_estimation_error(const double* estimate, const double* truth, int64_t p,
                                  int32_t offdiag_only, double* frobenius_out, double* l1_out);

/* Edge lists for K graphs are concatenated in edges_concat; edge_counts[k]
 * gives the number of edges of graph k. An edge enters the vote iff it is
 * present in strictly more than half of the graphs. edges_out must hold
 * p(p-1) entries. */
bggm_status bggm_majority_vote(int64_t p, int64_t num_graphs, const int64_t* edges_concat,
                               const int64_t* edge_counts, int64_t* edges_out,
                               int64_t* count_out);

/* Entry (j, jp) is the fraction of graphs containing that edge. out must
 * hold p*p entries. */
bggm_status bggm_mean_adjacency(int64_t p, int64_t num_graphs, const int64_t* edges_concat,
                                const int64_t* edge_counts, double* out);

#ifdef __cplusplus
}
#endif

#endif /* BILEVEL_GGM_H */
