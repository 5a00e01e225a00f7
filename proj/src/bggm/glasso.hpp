#pragma once

#include <optional>
#include <vector>

#include "bggm/linalg.hpp"

namespace bggm {

struct GlassoOptions {
  int max_iter = 100;  // outer sweeps
  double tol = 1e-4;   // max |change of Omega^{-1}| per sweep, relative to mean |diag(S)|
  std::optional<Matrix> warm_start;
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double final_delta = 0.0;
  double objective = 0.0;
  std::vector<double> objective_trace;  // one value per sweep
};

struct GlassoResult {
  Matrix omega;
  SolveReport report;
};

/// -log det(Omega) + tr(S Omega) + lambda * l1_offdiag(Omega).
double glasso_objective(const Matrix& s, double lambda, const Matrix& omega);

/// Graphical lasso: minimizes glasso_objective over positive definite Omega
/// with an off-diagonal L1 penalty. Coordinate descent over symmetric entry
/// pairs, each one-dimensional subproblem solved exactly, so the objective
/// is non-increasing across sweeps and the working covariance Omega^{-1} is
/// maintained by rank-two updates. lambda = 0 requires positive definite S
/// and returns S^{-1} directly. Non-convergence is reported, not thrown.
GlassoResult glasso_fit(const Matrix& s, double lambda, const GlassoOptions& opts = {});

/// Max stationarity violation of the glasso objective at Omega: with
/// Sigma = Omega^{-1}, |s_ij - sigma_ij + lambda*sign(omega_ij)| on nonzero
/// off-diagonals, max(0, |s_ij - sigma_ij| - lambda) on zero off-diagonals,
/// |s_ii - sigma_ii| on the diagonal.
double glasso_kkt(const Matrix& s, double lambda, const Matrix& omega);

}  // namespace bggm
