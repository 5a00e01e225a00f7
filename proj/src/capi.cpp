#include "bilevel_ggm.h"

#include <cstring>
#include <string>
#include <vector>

#include "bggm/glasso.hpp"
#include "bggm/linalg.hpp"
#include "bggm/metrics.hpp"
#include "bggm/rcm.hpp"
#include "bggm/simgen.hpp"
#include "bggm/sparsecov.hpp"
#include "bggm/tuning.hpp"

struct bggm_dataset {
  std::vector<bggm::SubjectData> subjects;
};

struct bggm_rcm_fit {
  bggm::RcmFit fit;
};

struct bggm_tune_result {
  std::vector<bggm::TuneEntry> table;
  int64_t infeasible_count = 0;
  bggm_rcm_fit best;
};

struct bggm_sim_result {
  bggm::SimTruth truth;
  int64_t n = 0;
};

namespace {

thread_local std::string g_last_error;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bggm::Matrix from_buffer(const double* data, int64_t rows, int64_t cols) {
  return Eigen::Map<const RowMajor>(data, rows, cols);
}

void to_buffer(const bggm::Matrix& m, double* out) {
  Eigen::Map<RowMajor>(out, m.rows(), m.cols()) = m;
}

bggm_status fail(bggm_status code, const char* message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
bggm_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const bggm::DimensionMismatch& e) {
    return fail(BGGM_ERR_DIMENSION_MISMATCH, e.what());
  } catch (const bggm::DimensionTooSmall& e) {
    return fail(BGGM_ERR_DIMENSION_TOO_SMALL, e.what());
  } catch (const bggm::NonFiniteInput& e) {
    return fail(BGGM_ERR_NON_FINITE_INPUT, e.what());
  } catch (const bggm::NotPositiveDefinite& e) {
    return fail(BGGM_ERR_NOT_POSITIVE_DEFINITE, e.what());
  } catch (const bggm::SingularSample& e) {
    return fail(BGGM_ERR_SINGULAR_SAMPLE, e.what());
  } catch (const bggm::InvalidLambda& e) {
    return fail(BGGM_ERR_INVALID_LAMBDA, e.what());
  } catch (const bggm::UnequalSampleSizes& e) {
    return fail(BGGM_ERR_UNEQUAL_SAMPLE_SIZES, e.what());
  } catch (const bggm::EmptyFeasibleGrid& e) {
    return fail(BGGM_ERR_EMPTY_FEASIBLE_GRID, e.what());
  } catch (const bggm::InvalidArgument& e) {
    return fail(BGGM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(BGGM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BGGM_ERR_INTERNAL, "unknown error");
  }
}

bggm_status require(bool ok, const char* message) {
  return ok ? BGGM_OK : fail(BGGM_ERR_INVALID_ARGUMENT, message);
}

bggm::RcmOptions to_rcm_options(const bggm_rcm_options* o) {
  bggm_rcm_options defaults;
  bggm_rcm_options_init(&defaults);
  if (!o) o = &defaults;
  bggm::RcmOptions r;
  r.max_bcd_iter = o->max_bcd_iter;
  r.bcd_tol = o->bcd_tol;
  r.rho_init = o->rho_init;
  if (o->init_mode != BGGM_INIT_BLEND && o->init_mode != BGGM_INIT_INVERSE_BLEND) {
    throw bggm::InvalidArgument("unknown init_mode");
  }
  r.init_mode = o->init_mode == BGGM_INIT_INVERSE_BLEND ? bggm::InitMode::kInverseBlend
                                                        : bggm::InitMode::kBlend;
  r.inner_glasso.max_iter = o->glasso_max_iter;
  r.inner_glasso.tol = o->glasso_tol;
  r.inner_sparsecov.max_iter = o->sparsecov_max_iter;
  r.inner_sparsecov.tol = o->sparsecov_tol;
  r.threads = o->threads;
  return r;
}

bggm::EdgeSet edges_from_flat(int64_t p, const int64_t* flat, int64_t count) {
  bggm::EdgeSet e;
  e.p = static_cast<int>(p);
  e.edges.reserve(static_cast<std::size_t>(count));
  for (int64_t i = 0; i < count; ++i) {
    e.edges.emplace_back(static_cast<int>(flat[2 * i]), static_cast<int>(flat[2 * i + 1]));
  }
  e.normalize();
  return e;
}

void edges_to_flat(const bggm::EdgeSet& e, int64_t* out) {
  int64_t idx = 0;
  for (const auto& [j, jp] : e.edges) {
    out[idx++] = j;
    out[idx++] = jp;
  }
}

}  // namespace

extern "C" {

const char* bggm_status_name(bggm_status status) {
  switch (status) {
    case BGGM_OK: return "ok";
    case BGGM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BGGM_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case BGGM_ERR_DIMENSION_TOO_SMALL: return "dimension too small";
    case BGGM_ERR_NON_FINITE_INPUT: return "non-finite input";
    case BGGM_ERR_NOT_POSITIVE_DEFINITE: return "not positive definite";
    case BGGM_ERR_SINGULAR_SAMPLE: return "singular sample";
    case BGGM_ERR_INVALID_LAMBDA: return "invalid lambda";
    case BGGM_ERR_UNEQUAL_SAMPLE_SIZES: return "unequal sample sizes";
    case BGGM_ERR_EMPTY_FEASIBLE_GRID: return "empty feasible grid";
    case BGGM_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* bggm_last_error_message(void) { return g_last_error.c_str(); }

const char* bggm_version(void) { return "1.0.0"; }

/* Datasets ---------------------------------------------------------- */

bggm_status bggm_dataset_create(bggm_dataset** out) {
  if (bggm_status s = require(out != nullptr, "out is NULL")) return s;
  return guarded([&] {
    *out = new bggm_dataset();
    return BGGM_OK;
  });
}

void bggm_dataset_destroy(bggm_dataset* dataset) { delete dataset; }

bggm_status bggm_dataset_add_subject(bggm_dataset* dataset, const double* observations,
                                     int64_t n, int64_t p) {
  if (bggm_status s = require(dataset && observations, "NULL argument")) return s;
  return guarded([&] {
    bggm::SubjectData subject =
        bggm::SubjectData::from_observations(from_buffer(observations, n, p));
    if (!dataset->subjects.empty() && dataset->subjects.front().dim() != subject.dim()) {
      throw bggm::DimensionMismatch("subject dimension differs from the dataset");
    }
    dataset->subjects.push_back(std::move(subject));
    return BGGM_OK;
  });
}

int64_t bggm_dataset_num_subjects(const bggm_dataset* dataset) {
  return dataset ? static_cast<int64_t>(dataset->subjects.size()) : 0;
}

int64_t bggm_dataset_dim(const bggm_dataset* dataset) {
  if (!dataset || dataset->subjects.empty()) return 0;
  return dataset->subjects.front().dim();
}

bggm_status bggm_sample_covariance(const double* observations, int64_t n, int64_t p,
                                   double* cov_out) {
  if (bggm_status s = require(observations && cov_out, "NULL argument")) return s;
  return guarded([&] {
    to_buffer(bggm::sample_covariance(from_buffer(observations, n, p)), cov_out);
    return BGGM_OK;
  });
}

/* Single-matrix solvers --------------------------------------------- */

bggm_status bggm_glasso_fit(const double* s, int64_t p, double lambda, int32_t max_iter,
                            double tol, const double* warm_start, double* omega_out,
                            int32_t* iterations_out, int32_t* converged_out,
                            double* objective_out) {
  if (bggm_status st = require(s && omega_out, "NULL argument")) return st;
  return guarded([&] {
    bggm::GlassoOptions opts;
    opts.max_iter = max_iter;
    opts.tol = tol;
    if (warm_start) opts.warm_start = from_buffer(warm_start, p, p);
    const bggm::GlassoResult result = bggm::glasso_fit(from_buffer(s, p, p), lambda, opts);
    to_buffer(result.omega, omega_out);
    if (iterations_out) *iterations_out = result.report.iterations;
    if (converged_out) *converged_out = result.report.converged ? 1 : 0;
    if (objective_out) *objective_out = result.report.objective;
    return BGGM_OK;
  });
}

bggm_status bggm_glasso_kkt(const double* s, int64_t p, double lambda, const double* omega,
                            double* residual_out) {
  if (bggm_status st = require(s && omega && residual_out, "NULL argument")) return st;
  return guarded([&] {
    *residual_out = bggm::glasso_kkt(from_buffer(s, p, p), lambda, from_buffer(omega, p, p));
    return BGGM_OK;
  });
}

bggm_status bggm_sparsecov_fit(const double* a, int64_t p, double gamma, int32_t max_iter,
                               double tol, const double* init, double* omega0_out,
                               int32_t* iterations_out, int32_t* converged_out,
                               double* objective_out) {
  if (bggm_status st = require(a && omega0_out, "NULL argument")) return st;
  if (bggm_status st = require(init || gamma == 0.0, "init is required when gamma > 0")) {
    return st;
  }
  return guarded([&] {
    bggm::SparseCovOptions opts;
    opts.max_iter = max_iter;
    opts.tol = tol;
    if (init) opts.init = from_buffer(init, p, p);
    const bggm::SparseCovResult result = bggm::sparsecov_fit(from_buffer(a, p, p), gamma, opts);
    to_buffer(result.omega0, omega0_out);
    if (iterations_out) *iterations_out = result.report.iterations;
    if (converged_out) *converged_out = result.report.converged ? 1 : 0;
    if (objective_out) *objective_out = result.report.objective;
    return BGGM_OK;
  });
}

bggm_status bggm_sparsecov_kkt(const double* a, int64_t p, double gamma, const double* omega0,
                               double* residual_out) {
  if (bggm_status st = require(a && omega0 && residual_out, "NULL argument")) return st;
  return guarded([&] {
    *residual_out =
        bggm::sparsecov_kkt(from_buffer(a, p, p), gamma, from_buffer(omega0, p, p));
    return BGGM_OK;
  });
}

/* Random covariance model ------------------------------------------- */

void bggm_rcm_options_init(bggm_rcm_options* options) {
  if (!options) return;
  options->max_bcd_iter = 100;
  options->bcd_tol = 1e-4;
  options->rho_init = 0.1;
  options->init_mode = BGGM_INIT_BLEND;
  options->glasso_max_iter = 100;
  options->glasso_tol = 1e-4;
  options->sparsecov_max_iter = 200;
  options->sparsecov_tol = 1e-4;
  options->threads = 0;
}

bggm_status bggm_rcm_fit_create(const bggm_dataset* dataset, double lambda1, double lambda2,
                                double lambda3, const bggm_rcm_options* options,
                                bggm_rcm_fit** out) {
  if (bggm_status st = require(dataset && out, "NULL argument")) return st;
  return guarded([&] {
    const bggm::LambdaTriple lambda{lambda1, lambda2, lambda3};
    auto* fit = new bggm_rcm_fit();
    try {
      fit->fit = bggm::rcm_fit(dataset->subjects, lambda, to_rcm_options(options));
    } catch (...) {
      delete fit;
      throw;
    }
    *out = fit;
    return BGGM_OK;
  });
}

void bggm_rcm_fit_destroy(bggm_rcm_fit* fit) { delete fit; }

int64_t bggm_rcm_fit_dim(const bggm_rcm_fit* fit) {
  return fit ? fit->fit.omega0.rows() : 0;
}

int64_t bggm_rcm_fit_num_subjects(const bggm_rcm_fit* fit) {
  return fit ? static_cast<int64_t>(fit->fit.omegas.size()) : 0;
}

int32_t bggm_rcm_fit_iterations(const bggm_rcm_fit* fit) {
  return fit ? fit->fit.iterations : 0;
}

int32_t bggm_rcm_fit_converged(const bggm_rcm_fit* fit) {
  return fit && fit->fit.converged ? 1 : 0;
}

int32_t bggm_rcm_fit_group_estimated(const bggm_rcm_fit* fit) {
  return fit && fit->fit.group_estimated ? 1 : 0;
}

bggm_status bggm_rcm_fit_lambda(const bggm_rcm_fit* fit, double* lambda1, double* lambda2,
                                double* lambda3) {
  if (bggm_status st = require(fit != nullptr, "NULL argument")) return st;
  if (lambda1) *lambda1 = fit->fit.lambda.lambda1;
  if (lambda2) *lambda2 = fit->fit.lambda.lambda2;
  if (lambda3) *lambda3 = fit->fit.lambda.lambda3;
  return BGGM_OK;
}

bggm_status bggm_rcm_fit_group_precision(const bggm_rcm_fit* fit, double* out) {
  if (bggm_status st = require(fit && out, "NULL argument")) return st;
  to_buffer(fit->fit.omega0, out);
  return BGGM_OK;
}

bggm_status bggm_rcm_fit_individual_precision(const bggm_rcm_fit* fit, int64_t k, double* out) {
  if (bggm_status st = require(fit && out, "NULL argument")) return st;
  if (k < 0 || k >= static_cast<int64_t>(fit->fit.omegas.size())) {
    return fail(BGGM_ERR_INVALID_ARGUMENT, "subject index out of range");
  }
  to_buffer(fit->fit.omegas[static_cast<std::size_t>(k)], out);
  return BGGM_OK;
}

int64_t bggm_rcm_fit_trace_length(const bggm_rcm_fit* fit) {
  return fit ? static_cast<int64_t>(fit->fit.objective_trace.size()) : 0;
}

bggm_status bggm_rcm_fit_objective_trace(const bggm_rcm_fit* fit, double* out) {
  if (bggm_status st = require(fit && out, "NULL argument")) return st;
  std::memcpy(out, fit->fit.objective_trace.data(),
              fit->fit.objective_trace.size() * sizeof(double));
  return BGGM_OK;
}

bggm_status bggm_rcm_fit_kkt(const bggm_rcm_fit* fit, const bggm_dataset* dataset,
                             double* individual_out, double* group_out) {
  if (bggm_status st = require(fit && dataset, "NULL argument")) return st;
  return guarded([&] {
    std::vector<bggm::Matrix> covs;
    covs.reserve(dataset->subjects.size());
    for (const auto& s : dataset->subjects) covs.push_back(s.sample_cov);
    const bggm::KktResiduals res = bggm::rcm_kkt(fit->fit, covs);
    if (individual_out) *individual_out = res.individual;
    if (group_out) *group_out = res.group;
    return BGGM_OK;
  });
}

double bggm_rcm_fit_degrees_of_freedom(const bggm_rcm_fit* fit) {
  return fit ? bggm::degrees_of_freedom(fit->fit) : 0.0;
}

bggm_status bggm_rcm_fit_bic1(const bggm_rcm_fit* fit, const bggm_dataset* dataset,
                              double* out) {
  if (bggm_status st = require(fit && dataset && out, "NULL argument")) return st;
  return guarded([&] {
    *out = bggm::bic1(fit->fit, dataset->subjects);
    return BGGM_OK;
  });
}

bggm_status bggm_rcm_fit_bic2(const bggm_rcm_fit* fit, const bggm_dataset* dataset,
                              double* out) {
  if (bggm_status st = require(fit && dataset && out, "NULL argument")) return st;
  return guarded([&] {
    *out = bggm::bic2(fit->fit, dataset->subjects);
    return BGGM_OK;
  });
}

/* Tuning ------------------------------------------------------------ */

bggm_status bggm_tune(const bggm_dataset* dataset, const double* lambda1_values,
                      int64_t lambda1_count, const double* lambda2_values,
                      int64_t lambda2_count, const double* lambda3_values,
                      int64_t lambda3_count, int32_t criterion,
                      const bggm_rcm_options* options, bggm_tune_result** out) {
  if (bggm_status st =
          require(dataset && lambda1_values && lambda2_values && lambda3_values && out,
                  "NULL argument")) {
    return st;
  }
  if (criterion != BGGM_CRITERION_BIC1 && criterion != BGGM_CRITERION_BIC2) {
    return fail(BGGM_ERR_INVALID_ARGUMENT, "criterion must be BIC1 or BIC2");
  }
  return guarded([&] {
    bggm::LambdaGrid grid;
    grid.lambda1_values.assign(lambda1_values, lambda1_values + lambda1_count);
    grid.lambda2_values.assign(lambda2_values, lambda2_values + lambda2_count);
    grid.lambda3_values.assign(lambda3_values, lambda3_values + lambda3_count);
    const auto crit = criterion == BGGM_CRITERION_BIC1 ? bggm::Criterion::kBic1
                                                       : bggm::Criterion::kBic2;
    bggm::TuneResult tuned = bggm::tune(dataset->subjects, grid, crit, to_rcm_options(options));
    auto* result = new bggm_tune_result();
    result->table = std::move(tuned.table);
    result->infeasible_count = static_cast<int64_t>(tuned.infeasible.size());
    result->best.fit = std::move(tuned.best);
    *out = result;
    return BGGM_OK;
  });
}

void bggm_tune_result_destroy(bggm_tune_result* result) { delete result; }

int64_t bggm_tune_result_rows(const bggm_tune_result* result) {
  return result ? static_cast<int64_t>(result->table.size()) : 0;
}

bggm_status bggm_tune_result_row(const bggm_tune_result* result, int64_t row, double* lambda1,
                                 double* lambda2, double* lambda3, double* bic, double* df,
                                 int32_t* converged) {
  if (bggm_status st = require(result != nullptr, "NULL argument")) return st;
  if (row < 0 || row >= static_cast<int64_t>(result->table.size())) {
    return fail(BGGM_ERR_INVALID_ARGUMENT, "row index out of range");
  }
  const bggm::TuneEntry& e = result->table[static_cast<std::size_t>(row)];
  if (lambda1) *lambda1 = e.lambda.lambda1;
  if (lambda2) *lambda2 = e.lambda.lambda2;
  if (lambda3) *lambda3 = e.lambda.lambda3;
  if (bic) *bic = e.bic;
  if (df) *df = e.df;
  if (converged) *converged = e.converged ? 1 : 0;
  return BGGM_OK;
}

int64_t bggm_tune_result_infeasible_count(const bggm_tune_result* result) {
  return result ? result->infeasible_count : 0;
}

const bggm_rcm_fit* bggm_tune_result_best(const bggm_tune_result* result) {
  return result ? &result->best : nullptr;
}

bggm_status bggm_default_grid(int64_t p, int64_t n, double* lambda1_out, double* lambda2_out,
                              double* lambda3_out) {
  if (bggm_status st =
          require(lambda1_out && lambda2_out && lambda3_out, "NULL argument")) {
    return st;
  }
  return guarded([&] {
    const bggm::LambdaGrid grid = bggm::default_grid(static_cast<int>(p), static_cast<int>(n));
    std::memcpy(lambda1_out, grid.lambda1_values.data(),
                grid.lambda1_values.size() * sizeof(double));
    std::memcpy(lambda2_out, grid.lambda2_values.data(),
                grid.lambda2_values.size() * sizeof(double));
    std::memcpy(lambda3_out, grid.lambda3_values.data(),
                grid.lambda3_values.size() * sizeof(double));
    return BGGM_OK;
  });
}

/* Simulation --------------------------------------------------------- */

void bggm_sim_options_init(bggm_sim_options* options) {
  if (!options) return;
  options->p = 100;
  options->num_subjects = 8;
  options->n = 50;
  options->rho_diff = 0.0;
  options->graph_model = BGGM_GRAPH_SCALE_FREE;
  options->er_edge_prob = 0.02;
  options->explicit_edges = nullptr;
  options->explicit_edge_count = 0;
  options->value_lo = 0.5;
  options->value_hi = 1.0;
  options->seed = 0;
}

bggm_status bggm_simulate(const bggm_sim_options* options, bggm_sim_result** out) {
  if (bggm_status st = require(options && out, "NULL argument")) return st;
  return guarded([&] {
    bggm::SimScenario scenario;
    scenario.p = static_cast<int>(options->p);
    scenario.k_subjects = static_cast<int>(options->num_subjects);
    scenario.n = static_cast<int>(options->n);
    scenario.rho_diff = options->rho_diff;
    switch (options->graph_model) {
      case BGGM_GRAPH_SCALE_FREE: scenario.graph_model = bggm::GraphModel::kScaleFree; break;
      case BGGM_GRAPH_ERDOS_RENYI: scenario.graph_model = bggm::GraphModel::kErdosRenyi; break;
      case BGGM_GRAPH_EXPLICIT: scenario.graph_model = bggm::GraphModel::kExplicit; break;
      default: throw bggm::InvalidArgument("unknown graph model");
    }
    scenario.er_edge_prob = options->er_edge_prob;
    if (options->graph_model == BGGM_GRAPH_EXPLICIT) {
      if (!options->explicit_edges && options->explicit_edge_count > 0) {
        throw bggm::InvalidArgument("explicit_edges is NULL");
      }
      scenario.explicit_edges =
          edges_from_flat(options->p, options->explicit_edges, options->explicit_edge_count);
    }
    scenario.value_lo = options->value_lo;
    scenario.value_hi = options->value_hi;
    scenario.seed = options->seed;

    auto* result = new bggm_sim_result();
    try {
      result->truth = bggm::generate_scenario(scenario);
      result->n = scenario.n;
    } catch (...) {
      delete result;
      throw;
    }
    *out = result;
    return BGGM_OK;
  });
}

void bggm_sim_result_destroy(bggm_sim_result* result) { delete result; }

int64_t bggm_sim_result_p(const bggm_sim_result* result) {
  return result ? result->truth.group_precision.rows() : 0;
}

int64_t bggm_sim_result_num_subjects(const bggm_sim_result* result) {
  return result ? static_cast<int64_t>(result->truth.datasets.size()) : 0;
}

int64_t bggm_sim_result_n(const bggm_sim_result* result) { return result ? result->n : 0; }

bggm_status bggm_sim_result_observations(const bggm_sim_result* result, int64_t k,
                                         double* out) {
  if (bggm_status st = require(result && out, "NULL argument")) return st;
  if (k < 0 || k >= bggm_sim_result_num_subjects(result)) {
    return fail(BGGM_ERR_INVALID_ARGUMENT, "subject index out of range");
  }
  to_buffer(result->truth.datasets[static_cast<std::size_t>(k)].observations, out);
  return BGGM_OK;
}

bggm_status bggm_sim_result_group_precision(const bggm_sim_result* result, double* out) {
  if (bggm_status st = require(result && out, "NULL argument")) return st;
  to_buffer(result->truth.group_precision, out);
  return BGGM_OK;
}

bggm_status bggm_sim_result_individual_precision(const bggm_sim_result* result, int64_t k,
                                                 double* out) {
  if (bggm_status st = require(result && out, "NULL argument")) return st;
  if (k < 0 || k >= bggm_sim_result_num_subjects(result)) {
    return fail(BGGM_ERR_INVALID_ARGUMENT, "subject index out of range");
  }
  to_buffer(result->truth.individual_precisions[static_cast<std::size_t>(k)], out);
  return BGGM_OK;
}

int64_t bggm_sim_result_group_edge_count(const bggm_sim_result* result) {
  return result ? static_cast<int64_t>(result->truth.group_edges.edges.size()) : 0;
}

bggm_status bggm_sim_result_group_edges(const bggm_sim_result* result, int64_t* out) {
  if (bggm_status st = require(result && out, "NULL argument")) return st;
  edges_to_flat(result->truth.group_edges, out);
  return BGGM_OK;
}

int64_t bggm_sim_result_individual_edge_count(const bggm_sim_result* result, int64_t k) {
  if (!result || k < 0 || k >= bggm_sim_result_num_subjects(result)) return 0;
  return static_cast<int64_t>(result->truth.individual_edges[static_cast<std::size_t>(k)]
                                  .edges.size());
}

bggm_status bggm_sim_result_individual_edges(const bggm_sim_result* result, int64_t k,
                                             int64_t* out) {
  if (bggm_status st = require(result && out, "NULL argument")) return st;
  if (k < 0 || k >= bggm_sim_result_num_subjects(result)) {
    return fail(BGGM_ERR_INVALID_ARGUMENT, "subject index out of range");
  }
  edges_to_flat(result->truth.individual_edges[static_cast<std::size_t>(k)], out);
  return BGGM_OK;
}

/* Metrics ------------------------------------------------------------ */

bggm_status bggm_edges_from_precision(const double* omega, int64_t p, double eps,
                                      int64_t* edges_out, int64_t* count_out) {
  if (bggm_status st = require(omega && edges_out && count_out, "NULL argument")) return st;
  return guarded([&] {
    const bggm::EdgeSet e = bggm::edges_from_precision(
        from_buffer(omega, p, p), eps > 0.0 ? eps : bggm::kZeroEps);
    edges_to_flat(e, edges_out);
    *count_out = static_cast<int64_t>(e.edges.size());
    return BGGM_OK;
  });
}

bggm_status bggm_edge_confusion(int64_t p, const int64_t* estimated_edges,
                                int64_t estimated_count, const int64_t* truth_edges,
                                int64_t truth_count, double* tpr, double* fpr, int64_t* tp,
                                int64_t* fp, int64_t* tn, int64_t* fn) {
  if (bggm_status st = require((estimated_edges || estimated_count == 0) &&
                                   (truth_edges || truth_count == 0),
                               "NULL argument")) {
    return st;
  }
  return guarded([&] {
    const bggm::EdgeConfusion c =
        bggm::edge_confusion(edges_from_flat(p, estimated_edges, estimated_count),
                             edges_from_flat(p, truth_edges, truth_count));
    if (tpr) *tpr = c.tpr;
    if (fpr) *fpr = c.fpr;
    if (tp) *tp = c.tp;
    if (fp) *fp = c.fp;
    if (tn) *tn = c.tn;
    if (fn) *fn = c.fn;
    return BGGM_OK;
  });
}

bggm_status bggm_estimation_error(const double* estimate, const double* truth, int64_t p,
                                  int32_t offdiag_only, double* frobenius_out, double* l1_out) {
  if (bggm_status st = require(estimate && truth, "NULL argument")) return st;
  return guarded([&] {
    const bggm::EstimationError err = bggm::estimation_error(
        from_buffer(estimate, p, p), from_buffer(truth, p, p), offdiag_only != 0);
    if (frobenius_out) *frobenius_out = err.frobenius;
    if (l1_out) *l1_out = err.entrywise_l1;
    return BGGM_OK;
  });
}

bggm_status bggm_majority_vote(int64_t p, int64_t num_graphs, const int64_t* edges_concat,
                               const int64_t* edge_counts, int64_t* edges_out,
                               int64_t* count_out) {
  if (bggm_status st = require(edge_counts && edges_out && count_out, "NULL argument")) {
    return st;
  }
  return guarded([&] {
    std::vector<bggm::EdgeSet> sets;
    sets.reserve(static_cast<std::size_t>(num_graphs));
    int64_t offset = 0;
    for (int64_t k = 0; k < num_graphs; ++k) {
      if (edge_counts[k] > 0 && !edges_concat) {
        throw bggm::InvalidArgument("edges_concat is NULL");
      }
      sets.push_back(edges_from_flat(p, edges_concat + 2 * offset, edge_counts[k]));
      offset += edge_counts[k];
    }
    const bggm::EdgeSet vote = bggm::majority_vote_group(sets);
    edges_to_flat(vote, edges_out);
    *count_out = static_cast<int64_t>(vote.edges.size());
    return BGGM_OK;
  });
}

bggm_status bggm_mean_adjacency(int64_t p, int64_t num_graphs, const int64_t* edges_concat,
                                const int64_t* edge_counts, double* out) {
  if (bggm_status st = require(edge_counts && out, "NULL argument")) return st;
  return guarded([&] {
    std::vector<bggm::EdgeSet> sets;
    sets.reserve(static_cast<std::size_t>(num_graphs));
    int64_t offset = 0;
    for (int64_t k = 0; k < num_graphs; ++k) {
      if (edge_counts[k] > 0 && !edges_concat) {
        throw bggm::InvalidArgument("edges_concat is NULL");
      }
      sets.push_back(edges_from_flat(p, edges_concat + 2 * offset, edge_counts[k]));
      offset += edge_counts[k];
    }
    to_buffer(bggm::mean_adjacency(sets), out);
    return BGGM_OK;
  });
}

} /* extern "C" */
