#pragma once

#include "bggm/glasso.hpp"
#include "bggm/linalg.hpp"

namespace bggm {

struct SparseCovOptions {
  int max_iter = 200;
  double tol = 1e-4;  // max |entry change of Omega0| per sweep, relative to mean |diag(A)|
  Matrix init;        // required starting point, symmetric positive definite
};

struct SparseCovResult {
  Matrix omega0;
  SolveReport report;
};

/// log det(Omega0) + tr(A Omega0^{-1}) + gamma * l1_offdiag(Omega0).
double sparsecov_objective(const Matrix& a, double gamma, const Matrix& omega0);

/// Sparse covariance-side solver: minimizes sparsecov_objective over
/// positive definite Omega0. The smooth part is a difference of convex
/// functions, so the result is a local minimizer / critical point only.
/// Coordinate descent over symmetric entry pairs: a damped Newton step on
/// the smooth part plus soft-thresholding, with steps halved up to 30 times
/// when they would break positive definiteness or increase the objective,
/// then skipped for the sweep. gamma = 0 returns A itself (the unpenalized
/// stationary point). Fixed cyclic update order for determinism.
SparseCovResult sparsecov_fit(const Matrix& a, double gamma, const SparseCovOptions& opts);

/// Max stationarity violation at Omega0: gradient of the smooth part is
/// Omega0^{-1} - Omega0^{-1} A Omega0^{-1}, combined with the gamma
/// subdifferential of the off-diagonal L1 exactly as in glasso_kkt.
double sparsecov_kkt(const Matrix& a, double gamma, const Matrix& omega0);

}  // namespace bggm
