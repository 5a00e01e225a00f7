#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bggm/sparsecov.hpp"
#include "testutil.hpp"

using bggm::Matrix;
using bggm::SparseCovOptions;

namespace {

// Closed-form objective for p = 2, used by the brute-force grid oracle.
double objective_p2(const Matrix& a, double gamma, double w11, double w12, double w22) {
  const double det = w11 * w22 - w12 * w12;
  if (det <= 0.0 || w11 <= 0.0) return std::numeric_limits<double>::infinity();
  const double tr = (a(0, 0) * w22 - 2.0 * a(0, 1) * w12 + a(1, 1) * w11) / det;
  return std::log(det) + tr + 2.0 * gamma * std::abs(w12);
}

double grid_minimum(const Matrix& a, double gamma) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 100; ++i) {
    const double w11 = 0.5 + 0.01 * i;
    for (int j = 0; j <= 100; ++j) {
      const double w12 = -0.5 + 0.01 * j;
      for (int k = 0; k <= 100; ++k) {
        const double w22 = 0.5 + 0.01 * k;
        best = std::min(best, objective_p2(a, gamma, w11, w12, w22));
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("gamma = 0 returns the input exactly") {
  bggm::RngStream rng(201);
  const Matrix a = testutil::random_spd(4, rng);
  SparseCovOptions opts;
  const auto [omega0, report] = bggm::sparsecov_fit(a, 0.0, opts);
  CHECK(report.converged);
  CHECK((omega0 - a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identity input is a fixed point for any gamma") {
  const Matrix eye = Matrix::Identity(3, 3);
  for (double gamma : {0.0, 0.1, 1.0, 10.0}) {
    SparseCovOptions opts;
    opts.init = eye;
    const auto [omega0, report] = bggm::sparsecov_fit(eye, gamma, opts);
    CHECK(report.converged);
    CHECK((omega0 - eye).cwiseAbs().maxCoeff() <= 1e-12);
  }
  // And it is reached from elsewhere.
  SparseCovOptions opts;
  opts.init = 2.0 * eye;
  const auto [omega0, report] = bggm::sparsecov_fit(eye, 0.5, opts);
  CHECK((omega0 - eye).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("the spec p=2 grid instance") {
  Matrix a(2, 2);
  a << 1.0, 0.3, 0.3, 1.0;
  SparseCovOptions opts;
  opts.init = a;
  const auto [omega0, report] = bggm::sparsecov_fit(a, 0.5, opts);
  CHECK(report.converged);
  CHECK(report.objective <= grid_minimum(a, 0.5) + 1e-4);
}

TEST_CASE("grid oracle on seeded instances") {
  bggm::RngStream rng(203);
  for (int rep = 0; rep < 3; ++rep) {
    const Matrix a = testutil::random_spd(2, rng, 0.8);
    const double gamma = rng.uniform(0.1, 0.8);
    SparseCovOptions opts;
    opts.init = a;
    const auto [omega0, report] = bggm::sparsecov_fit(a, gamma, opts);
    CHECK(report.objective <= grid_minimum(a, gamma) + 1e-4);
  }
}

TEST_CASE("objective non-increasing per sweep and PD preserved") {
  bggm::RngStream rng(205);
  const Matrix a = testutil::random_spd(6, rng);
  SparseCovOptions opts;
  opts.init = Matrix::Identity(6, 6);
  const auto [omega0, report] = bggm::sparsecov_fit(a, 0.2, opts);
  for (std::size_t i = 1; i < report.objective_trace.size(); ++i) {
    CHECK(report.objective_trace[i] <=
          report.objective_trace[i - 1] + 1e-10 * std::abs(report.objective_trace[i - 1]));
  }
  CHECK(bggm::log_det_pd(omega0) == bggm::log_det_pd(omega0));  // PD: no throw
}

TEST_CASE("restarting at a minimizer stops within two sweeps") {
  bggm::RngStream rng(207);
  const Matrix a = testutil::random_spd(4, rng);
  SparseCovOptions opts;
  opts.init = a;
  const auto first = bggm::sparsecov_fit(a, 0.3, opts);
  REQUIRE(first.report.converged);
  opts.init = first.omega0;
  const auto second = bggm::sparsecov_fit(a, 0.3, opts);
  CHECK(second.report.converged);
  CHECK(second.report.iterations <= 2);
}

TEST_CASE("sparsecov_kkt stationarity checks") {
  bggm::RngStream rng(209);
  const Matrix a = testutil::random_spd(4, rng);
  CHECK(bggm::sparsecov_kkt(a, 0.0, a) <= 1e-12);
  CHECK(bggm::sparsecov_kkt(Matrix::Identity(4, 4), 0.7, Matrix::Identity(4, 4)) == 0.0);

  SparseCovOptions opts;
  opts.init = a;
  const auto [omega0, report] = bggm::sparsecov_fit(a, 0.2, opts);
  REQUIRE(report.converged);
  CHECK(bggm::sparsecov_kkt(a, 0.2, omega0) <= 10.0 * opts.tol);
}

TEST_CASE("option validation") {
  const Matrix a = Matrix::Identity(3, 3);
  SparseCovOptions opts;  // init missing
  CHECK_THROWS_AS(bggm::sparsecov_fit(a, 0.5, opts), bggm::InvalidArgument);
  opts.init = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(bggm::sparsecov_fit(a, 0.5, opts), bggm::DimensionMismatch);
  opts.init = a;
  CHECK_THROWS_AS(bggm::sparsecov_fit(a, -0.5, opts), bggm::InvalidArgument);
}
