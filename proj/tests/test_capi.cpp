#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Exercises the shared-library surface end to end: handles, error codes,
// and agreement with the underlying solvers.

#include <bilevel_ggm.h>

#include <cstring>
#include <string>
#include <vector>

#include "bggm/glasso.hpp"
#include "bggm/rng.hpp"
#include "testutil.hpp"

namespace {

std::vector<double> row_major(const bggm::Matrix& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      out[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(bggm_status_name(BGGM_OK)) == "ok");
  CHECK(std::string(bggm_status_name(BGGM_ERR_INVALID_LAMBDA)) == "invalid lambda");
  CHECK(bggm_version() != nullptr);
}

TEST_CASE("dataset lifecycle and validation") {
  bggm_dataset* data = nullptr;
  REQUIRE(bggm_dataset_create(&data) == BGGM_OK);
  CHECK(bggm_dataset_num_subjects(data) == 0);
  CHECK(bggm_dataset_dim(data) == 0);

  bggm::RngStream rng(601);
  const auto y1 = row_major(testutil::random_gaussian(12, 4, rng));
  CHECK(bggm_dataset_add_subject(data, y1.data(), 12, 4) == BGGM_OK);
  CHECK(bggm_dataset_dim(data) == 4);

  const auto bad = row_major(testutil::random_gaussian(12, 5, rng));
  CHECK(bggm_dataset_add_subject(data, bad.data(), 12, 5) == BGGM_ERR_DIMENSION_MISMATCH);
  CHECK(std::strlen(bggm_last_error_message()) > 0);

  CHECK(bggm_dataset_add_subject(nullptr, y1.data(), 12, 4) == BGGM_ERR_INVALID_ARGUMENT);
  bggm_dataset_destroy(data);
}

TEST_CASE("sample covariance matches the core") {
  bggm::RngStream rng(603);
  const bggm::Matrix y = testutil::random_gaussian(9, 3, rng);
  const auto buf = row_major(y);
  std::vector<double> cov(9);
  REQUIRE(bggm_sample_covariance(buf.data(), 9, 3, cov.data()) == BGGM_OK);
  const bggm::Matrix expected = bggm::sample_covariance(y);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(cov[static_cast<std::size_t>(i * 3 + j)] == expected(i, j));
    }
  }
}

TEST_CASE("glasso through the C surface") {
  bggm::RngStream rng(605);
  const bggm::Matrix s = testutil::random_spd(4, rng);
  const auto s_buf = row_major(s);
  std::vector<double> omega(16);
  int32_t iterations = 0, converged = 0;
  double objective = 0.0;
  REQUIRE(bggm_glasso_fit(s_buf.data(), 4, 0.1, 100, 1e-6, nullptr, omega.data(), &iterations,
                          &converged, &objective) == BGGM_OK);
  CHECK(converged == 1);

  double residual = 0.0;
  REQUIRE(bggm_glasso_kkt(s_buf.data(), 4, 0.1, omega.data(), &residual) == BGGM_OK);
  CHECK(residual <= 1e-5);

  const auto core = bggm::glasso_fit(s, 0.1, {100, 1e-6, {}});
  CHECK(objective == doctest::Approx(core.report.objective).epsilon(1e-12));
}

TEST_CASE("sparsecov through the C surface") {
  bggm::RngStream rng(607);
  const bggm::Matrix a = testutil::random_spd(3, rng);
  const auto a_buf = row_major(a);
  std::vector<double> w(9);
  // gamma = 0 without init returns the input.
  REQUIRE(bggm_sparsecov_fit(a_buf.data(), 3, 0.0, 100, 1e-4, nullptr, w.data(), nullptr,
                             nullptr, nullptr) == BGGM_OK);
  for (std::size_t i = 0; i < 9; ++i) CHECK(w[i] == a_buf[i]);
  // gamma > 0 without init is invalid.
  CHECK(bggm_sparsecov_fit(a_buf.data(), 3, 0.5, 100, 1e-4, nullptr, w.data(), nullptr, nullptr,
                           nullptr) == BGGM_ERR_INVALID_ARGUMENT);
  double residual = 0.0;
  REQUIRE(bggm_sparsecov_kkt(a_buf.data(), 3, 0.0, a_buf.data(), &residual) == BGGM_OK);
  CHECK(residual <= 1e-12);
}

TEST_CASE("rcm fit handles, metrics, and error codes") {
  bggm_sim_options sim_opts;
  bggm_sim_options_init(&sim_opts);
  sim_opts.p = 12;
  sim_opts.num_subjects = 3;
  sim_opts.n = 40;
  sim_opts.seed = 99;
  bggm_sim_result* sim = nullptr;
  REQUIRE(bggm_simulate(&sim_opts, &sim) == BGGM_OK);
  REQUIRE(bggm_sim_result_num_subjects(sim) == 3);
  CHECK(bggm_sim_result_group_edge_count(sim) == 11);

  bggm_dataset* data = nullptr;
  REQUIRE(bggm_dataset_create(&data) == BGGM_OK);
  std::vector<double> obs(static_cast<std::size_t>(40 * 12));
  for (int64_t k = 0; k < 3; ++k) {
    REQUIRE(bggm_sim_result_observations(sim, k, obs.data()) == BGGM_OK);
    REQUIRE(bggm_dataset_add_subject(data, obs.data(), 40, 12) == BGGM_OK);
  }

  bggm_rcm_fit* fit = nullptr;
  CHECK(bggm_rcm_fit_create(data, 0.1, 0.0, 0.5, nullptr, &fit) == BGGM_ERR_INVALID_LAMBDA);
  REQUIRE(bggm_rcm_fit_create(data, 0.15, 1.0, 0.3, nullptr, &fit) == BGGM_OK);
  CHECK(bggm_rcm_fit_dim(fit) == 12);
  CHECK(bggm_rcm_fit_num_subjects(fit) == 3);
  CHECK(bggm_rcm_fit_converged(fit) == 1);
  CHECK(bggm_rcm_fit_group_estimated(fit) == 1);

  const int64_t trace_len = bggm_rcm_fit_trace_length(fit);
  REQUIRE(trace_len >= 1);
  std::vector<double> trace(static_cast<std::size_t>(trace_len));
  REQUIRE(bggm_rcm_fit_objective_trace(fit, trace.data()) == BGGM_OK);
  for (int64_t i = 1; i < trace_len; ++i) {
    CHECK(trace[static_cast<std::size_t>(i)] <=
          trace[static_cast<std::size_t>(i - 1)] +
              1e-8 * std::abs(trace[static_cast<std::size_t>(i - 1)]));
  }

  double ind = 0.0, grp = 0.0;
  REQUIRE(bggm_rcm_fit_kkt(fit, data, &ind, &grp) == BGGM_OK);
  CHECK(ind <= 1e-3);
  CHECK(grp <= 1e-3);

  double b1 = 0.0, b2 = 0.0;
  REQUIRE(bggm_rcm_fit_bic1(fit, data, &b1) == BGGM_OK);
  REQUIRE(bggm_rcm_fit_bic2(fit, data, &b2) == BGGM_OK);
  CHECK(std::isfinite(b1));
  CHECK(std::isfinite(b2));
  CHECK(bggm_rcm_fit_degrees_of_freedom(fit) >= 0.0);

  // Edge extraction and confusion against the simulated truth.
  std::vector<double> omega(static_cast<std::size_t>(12 * 12));
  REQUIRE(bggm_rcm_fit_individual_precision(fit, 0, omega.data()) == BGGM_OK);
  std::vector<int64_t> est_edges(static_cast<std::size_t>(12 * 11));
  int64_t est_count = 0;
  REQUIRE(bggm_edges_from_precision(omega.data(), 12, 0.0, est_edges.data(), &est_count) ==
          BGGM_OK);
  std::vector<int64_t> true_edges(static_cast<std::size_t>(
      2 * bggm_sim_result_individual_edge_count(sim, 0)));
  REQUIRE(bggm_sim_result_individual_edges(sim, 0, true_edges.data()) == BGGM_OK);
  double tpr = -1.0, fpr = -1.0;
  REQUIRE(bggm_edge_confusion(12, est_edges.data(), est_count, true_edges.data(),
                              static_cast<int64_t>(true_edges.size() / 2), &tpr, &fpr, nullptr,
                              nullptr, nullptr, nullptr) == BGGM_OK);
  CHECK(tpr >= 0.0);
  CHECK(tpr <= 1.0);
  CHECK(fpr >= 0.0);
  CHECK(fpr <= 1.0);

  bggm_rcm_fit_destroy(fit);
  bggm_dataset_destroy(data);
  bggm_sim_result_destroy(sim);
}

TEST_CASE("tune through the C surface") {
  bggm_sim_options sim_opts;
  bggm_sim_options_init(&sim_opts);
  sim_opts.p = 8;
  sim_opts.num_subjects = 2;
  sim_opts.n = 30;
  sim_opts.seed = 7;
  bggm_sim_result* sim = nullptr;
  REQUIRE(bggm_simulate(&sim_opts, &sim) == BGGM_OK);
  bggm_dataset* data = nullptr;
  REQUIRE(bggm_dataset_create(&data) == BGGM_OK);
  std::vector<double> obs(static_cast<std::size_t>(30 * 8));
  for (int64_t k = 0; k < 2; ++k) {
    REQUIRE(bggm_sim_result_observations(sim, k, obs.data()) == BGGM_OK);
    REQUIRE(bggm_dataset_add_subject(data, obs.data(), 30, 8) == BGGM_OK);
  }

  const double l1[] = {0.1, 0.4};
  const double l2[] = {0.0, 1.0};
  const double l3[] = {0.0, 0.2};
  bggm_tune_result* tuned = nullptr;
  REQUIRE(bggm_tune(data, l1, 2, l2, 2, l3, 2, BGGM_CRITERION_BIC2, nullptr, &tuned) ==
          BGGM_OK);
  CHECK(bggm_tune_result_rows(tuned) == 6);
  CHECK(bggm_tune_result_infeasible_count(tuned) == 2);

  double bic_prev = -1e300;
  for (int64_t r = 0; r < bggm_tune_result_rows(tuned); ++r) {
    double bic = 0.0;
    REQUIRE(bggm_tune_result_row(tuned, r, nullptr, nullptr, nullptr, &bic, nullptr, nullptr) ==
            BGGM_OK);
    CHECK(bic >= bic_prev);
    bic_prev = bic;
  }
  const bggm_rcm_fit* best = bggm_tune_result_best(tuned);
  REQUIRE(best != nullptr);
  CHECK(bggm_rcm_fit_dim(best) == 8);

  CHECK(bggm_tune(data, l1, 2, l2, 2, l3, 2, 7, nullptr, &tuned) == BGGM_ERR_INVALID_ARGUMENT);

  bggm_tune_result_destroy(tuned);
  bggm_dataset_destroy(data);
  bggm_sim_result_destroy(sim);
}

TEST_CASE("default grid through the C surface") {
  double l1[BGGM_DEFAULT_GRID_LAMBDA1_COUNT];
  double l2[BGGM_DEFAULT_GRID_LAMBDA2_COUNT];
  double l3[BGGM_DEFAULT_GRID_LAMBDA3_COUNT];
  REQUIRE(bggm_default_grid(100, 50, l1, l2, l3) == BGGM_OK);
  CHECK(l1[0] > 0.0);
  for (int i = 1; i < BGGM_DEFAULT_GRID_LAMBDA1_COUNT; ++i) CHECK(l1[i] > l1[i - 1]);
  CHECK(l2[0] == 0.1);
  CHECK(l3[4] == 5.0);
}

TEST_CASE("majority vote and mean adjacency through the C surface") {
  // Graphs on 4 nodes: {0-1, 1-2}, {0-1}, {0-1, 2-3}.
  const int64_t edges_concat[] = {0, 1, 1, 2, 0, 1, 0, 1, 2, 3};
  const int64_t counts[] = {2, 1, 2};
  int64_t vote[12];
  int64_t vote_count = 0;
  REQUIRE(bggm_majority_vote(4, 3, edges_concat, counts, vote, &vote_count) == BGGM_OK);
  REQUIRE(vote_count == 1);
  CHECK(vote[0] == 0);
  CHECK(vote[1] == 1);

  double mean[16];
  REQUIRE(bggm_mean_adjacency(4, 3, edges_concat, counts, mean) == BGGM_OK);
  CHECK(mean[0 * 4 + 1] == doctest::Approx(1.0));
  CHECK(mean[1 * 4 + 2] == doctest::Approx(1.0 / 3.0));
  CHECK(mean[2 * 4 + 3] == doctest::Approx(1.0 / 3.0));
  CHECK(mean[0 * 4 + 2] == 0.0);
}
