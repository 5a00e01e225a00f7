#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bggm/glasso.hpp"
#include "bggm/metrics.hpp"
#include "testutil.hpp"

using bggm::GlassoOptions;
using bggm::Matrix;

namespace {

// p = 2 closed form: the optimal working covariance keeps the diagonal of S
// and soft-thresholds the off-diagonal; Omega is its inverse.
Matrix closed_form_p2(const Matrix& s, double lambda) {
  const double c = bggm::soft_threshold(s(0, 1), lambda);
  const double det = s(0, 0) * s(1, 1) - c * c;
  Matrix omega(2, 2);
  omega << s(1, 1) / det, -c / det, -c / det, s(0, 0) / det;
  return omega;
}

// Independent first-order oracle: proximal gradient with backtracking on
// -log det(Omega) + tr(S Omega) + lambda * |Omega|_1,offdiag.
Matrix prox_gradient_oracle(const Matrix& s, double lambda, int max_iter, double grad_tol) {
  const int p = static_cast<int>(s.rows());
  Matrix omega = Matrix::Identity(p, p);
  for (int i = 0; i < p; ++i) omega(i, i) = 1.0 / s(i, i);

  const auto smooth = [&](const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    double ld = 0.0;
    for (int i = 0; i < p; ++i) {
      if (!(llt.matrixLLT()(i, i) > 0.0)) return std::numeric_limits<double>::infinity();
      ld += std::log(llt.matrixLLT()(i, i));
    }
    return -2.0 * ld + s.cwiseProduct(m).sum();
  };

  double step = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const Matrix grad = s - omega.inverse();
    const double f0 = smooth(omega);
    Matrix cand;
    for (int halve = 0; halve < 60; ++halve) {
      cand = omega - step * grad;
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
          if (i != j) {
            const double x = cand(i, j);
            const double t = step * lambda;
            cand(i, j) = x > t ? x - t : (x < -t ? x + t : 0.0);
          }
        }
      }
      cand = 0.5 * (cand + cand.transpose());
      const double fc = smooth(cand);
      const Matrix diff = cand - omega;
      if (std::isfinite(fc) &&
          fc <= f0 + grad.cwiseProduct(diff).sum() + diff.squaredNorm() / (2.0 * step)) {
        break;
      }
      step *= 0.5;
    }
    const double move = (cand - omega).cwiseAbs().maxCoeff();
    omega = cand;
    if (move / step < grad_tol) break;
    step = std::min(step * 1.5, 1e3);
  }
  return omega;
}

}  // namespace

TEST_CASE("glasso matches the p=2 closed form") {
  bggm::RngStream rng(101);
  GlassoOptions opts;
  opts.tol = 1e-11;
  opts.max_iter = 1000;
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix s = testutil::random_spd(2, rng);
    const double lambda = rng.uniform(0.01, 0.6);
    const Matrix expected = closed_form_p2(s, lambda);
    const auto [omega, report] = bggm::glasso_fit(s, lambda, opts);
    CHECK(report.converged);
    CHECK((omega - expected).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(bggm::glasso_kkt(s, lambda, expected) <= 1e-10);
  }
}

TEST_CASE("the spec p=2 instance") {
  Matrix s(2, 2);
  s << 1.0, 0.6, 0.6, 1.0;
  GlassoOptions opts;
  opts.tol = 1e-10;
  opts.max_iter = 500;
  const auto [omega, report] = bggm::glasso_fit(s, 0.2, opts);
  const double det = 1.0 - 0.4 * 0.4;
  CHECK(omega(0, 0) == doctest::Approx(1.0 / det).epsilon(1e-7));
  CHECK(omega(0, 1) == doctest::Approx(-0.4 / det).epsilon(1e-7));
}

TEST_CASE("full shrinkage yields the diagonal estimate") {
  bggm::RngStream rng(103);
  const Matrix s = testutil::random_spd(5, rng);
  const double lambda = s.cwiseAbs().maxCoeff() + 0.1;
  const auto [omega, report] = bggm::glasso_fit(s, lambda);
  CHECK(report.converged);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i == j) {
        CHECK(omega(i, i) == doctest::Approx(1.0 / s(i, i)).epsilon(1e-12));
      } else {
        CHECK(omega(i, j) == 0.0);
      }
    }
  }
}

TEST_CASE("glasso objective within 1e-6 of the proximal-gradient oracle at p=3") {
  bggm::RngStream rng(105);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix s = testutil::random_spd(3, rng);
    const double lambda = rng.uniform(0.05, 0.3);
    const auto [omega, report] = bggm::glasso_fit(s, lambda, {500, 1e-9, {}});
    const Matrix oracle = prox_gradient_oracle(s, lambda, 200000, 1e-9);
    const double f_solver = bggm::glasso_objective(s, lambda, omega);
    const double f_oracle = bggm::glasso_objective(s, lambda, oracle);
    CHECK(std::abs(f_solver - f_oracle) <= 1e-6);
  }
}

TEST_CASE("objective is non-increasing across sweeps") {
  bggm::RngStream rng(107);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix s = testutil::random_spd(8, rng);
    const auto [omega, report] = bggm::glasso_fit(s, 0.08);
    REQUIRE(report.objective_trace.size() >= 1);
    for (std::size_t i = 1; i < report.objective_trace.size(); ++i) {
      const double prev = report.objective_trace[i - 1];
      const double next = report.objective_trace[i];
      CHECK(next <= prev + 1e-10 * std::abs(prev));
    }
  }
}

TEST_CASE("warm and cold starts agree") {
  bggm::RngStream rng(109);
  const Matrix s = testutil::random_spd(5, rng);
  const double lambda = 0.1;
  GlassoOptions opts;
  opts.tol = 1e-6;
  opts.max_iter = 500;
  const auto cold = bggm::glasso_fit(s, lambda, opts);

  GlassoOptions warm_opts = opts;
  warm_opts.warm_start = bggm::glasso_fit(s, 0.3, opts).omega;
  const auto warm = bggm::glasso_fit(s, lambda, warm_opts);

  CHECK(cold.report.converged);
  CHECK(warm.report.converged);
  CHECK(std::abs(cold.report.objective - warm.report.objective) <= 10.0 * opts.tol);
}

TEST_CASE("edge count is monotone along a decreasing-lambda path") {
  bggm::RngStream rng(111);
  const Matrix s = testutil::random_spd(10, rng);
  GlassoOptions opts;
  std::size_t prev_edges = 0;
  bool first = true;
  for (double lambda = 0.5; lambda >= 0.01; lambda *= 0.7) {
    const auto [omega, report] = bggm::glasso_fit(s, lambda, opts);
    const std::size_t edges = bggm::edges_from_precision(omega).edges.size();
    if (!first) CHECK(edges >= prev_edges);
    prev_edges = edges;
    first = false;
    opts.warm_start = omega;
  }
}

TEST_CASE("glasso_kkt flags perturbed solutions") {
  bggm::RngStream rng(113);
  const Matrix s = testutil::random_spd(4, rng);
  const double lambda = s.cwiseAbs().maxCoeff() + 0.05;
  Matrix omega = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) omega(i, i) = 1.0 / s(i, i);
  CHECK(bggm::glasso_kkt(s, lambda, omega) <= 1e-12);

  Matrix perturbed = omega;
  perturbed(0, 1) = perturbed(1, 0) = 0.01;
  CHECK(bggm::glasso_kkt(s, lambda, perturbed) > bggm::glasso_kkt(s, lambda, omega));
}

TEST_CASE("lambda = 0 returns the inverse sample covariance") {
  bggm::RngStream rng(115);
  const Matrix s = testutil::random_spd(4, rng);
  const auto [omega, report] = bggm::glasso_fit(s, 0.0);
  CHECK(report.converged);
  CHECK((omega - Matrix(s.inverse())).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("lambda = 0 on a singular sample is rejected") {
  Matrix s(3, 3);
  s << 1, 1, 0, 1, 1, 0, 0, 0, 1;  // rank 2
  CHECK_THROWS_AS(bggm::glasso_fit(s, 0.0), bggm::SingularSample);
}

TEST_CASE("non-convergence is reported, not thrown") {
  bggm::RngStream rng(117);
  const Matrix s = testutil::random_spd(6, rng);
  GlassoOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-12;
  const auto [omega, report] = bggm::glasso_fit(s, 0.05, opts);
  CHECK_FALSE(report.converged);
  CHECK(report.iterations == 1);
  CHECK(omega.allFinite());
  CHECK(bggm::log_det_pd(omega) == bggm::log_det_pd(omega));  // still PD
}

TEST_CASE("option validation") {
  const Matrix s = Matrix::Identity(3, 3);
  GlassoOptions opts;
  opts.max_iter = 0;
  CHECK_THROWS_AS(bggm::glasso_fit(s, 0.1, opts), bggm::InvalidArgument);
  opts.max_iter = 10;
  opts.tol = 0.0;
  CHECK_THROWS_AS(bggm::glasso_fit(s, 0.1, opts), bggm::InvalidArgument);
  CHECK_THROWS_AS(bggm::glasso_fit(s, -0.1), bggm::InvalidArgument);
  GlassoOptions warm;
  warm.warm_start = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(bggm::glasso_fit(s, 0.1, warm), bggm::DimensionMismatch);
}
