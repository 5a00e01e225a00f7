#include "bggm/sparsecov.hpp"

#include <algorithm>
#include <cmath>

#include "bggm/cd_detail.hpp"

namespace bggm {

namespace {

constexpr double kDetFloor = 1e-12;
constexpr double kStepFloor = 1e-14;
constexpr int kMaxHalvings = 30;

// Gradient of the smooth part is P - B with P = Omega0^{-1}, B = P A P.
double kkt_residual(double gamma, const Matrix& omega0, const Matrix& p_mat, const Matrix& b_mat) {
  const Eigen::Index p = omega0.rows();
  double r = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    r = std::max(r, std::abs(p_mat(i, i) - b_mat(i, i)));
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const double e = p_mat(i, j) - b_mat(i, j);
      const double w = omega0(i, j);
      if (std::abs(w) > kZeroEps) {
        r = std::max(r, std::abs(e + gamma * (w > 0.0 ? 1.0 : -1.0)));
      } else {
        r = std::max(r, std::max(0.0, std::abs(e) - gamma));
      }
    }
  }
  return r;
}

void refresh_state(const Matrix& omega0, const Matrix& a, Matrix& p_mat, Matrix& b_mat,
                   double& log_det) {
  Eigen::LLT<Matrix> llt(omega0);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("sparsecov iterate left the positive definite cone");
  }
  log_det = 0.0;
  for (Eigen::Index i = 0; i < omega0.rows(); ++i) log_det += std::log(llt.matrixLLT()(i, i));
  log_det *= 2.0;
  p_mat = llt.solve(Matrix::Identity(omega0.rows(), omega0.cols()));
  p_mat = 0.5 * (p_mat + p_mat.transpose());
  b_mat = p_mat * a * p_mat;
  b_mat = 0.5 * (b_mat + b_mat.transpose());
}

}  // namespace

double sparsecov_objective(const Matrix& a, double gamma, const Matrix& omega0) {
  const Matrix p_inv = inverse_pd(omega0);
  return log_det_pd(omega0) + a.cwiseProduct(p_inv).sum() + gamma * l1_offdiag(omega0);
}

double sparsecov_kkt(const Matrix& a_in, double gamma, const Matrix& omega0_in) {
  const Matrix a = symmetrized(a_in);
  const Matrix omega0 = symmetrized(omega0_in);
  if (a.rows() != omega0.rows()) throw DimensionMismatch("sparsecov_kkt: dimension mismatch");
  const Matrix p_mat = inverse_pd(omega0);
  Matrix b_mat = p_mat * a * p_mat;
  b_mat = 0.5 * (b_mat + b_mat.transpose());
  return kkt_residual(gamma, omega0, p_mat, b_mat);
}

SparseCovResult sparsecov_fit(const Matrix& a_in, double gamma, const SparseCovOptions& opts) {
  if (gamma < 0.0) throw InvalidArgument("sparsecov_fit: gamma must be nonnegative");
  if (opts.max_iter < 1) throw InvalidArgument("sparsecov_fit: max_iter must be at least 1");
  if (!(opts.tol > 0.0)) throw InvalidArgument("sparsecov_fit: tol must be positive");
  const Matrix a = symmetrized(a_in);
  const Eigen::Index p = a.rows();

  SparseCovResult result;

  if (gamma == 0.0) {
    // Stationarity P - P A P = 0 forces Omega0 = A; it is the global minimum.
    const double ld = log_det_pd(a);
    result.omega0 = a;
    result.report.converged = true;
    result.report.objective = ld + static_cast<double>(p);
    return result;
  }

  if (opts.init.size() == 0) throw InvalidArgument("sparsecov_fit: init is required");
  Matrix omega0 = symmetrized(opts.init);
  if (omega0.rows() != p) throw DimensionMismatch("sparsecov_fit: init dimension mismatch");

  Matrix p_mat, b_mat;
  double log_det = 0.0;
  refresh_state(omega0, a, p_mat, b_mat, log_det);

  // Cholesky factor of A, for cheap tr(A W^{-1}) = |L_W^{-1} C|_F^2 during
  // extrapolation trials.
  Eigen::LLT<Matrix> a_llt(a);
  if (a_llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("sparsecov_fit: A must be positive definite");
  }
  const Matrix a_chol = a_llt.matrixL();

  const double scale = std::max(a.diagonal().cwiseAbs().mean(), 1e-300);
  SolveReport& report = result.report;
  Matrix omega_prev_sweep = omega0;

  while (report.iterations < opts.max_iter) {
    ++report.iterations;
    double delta_abs = 0.0;

    for (Eigen::Index i = 0; i < p; ++i) {
      const double pii = p_mat(i, i);
      const double bii = b_mat(i, i);
      const double slope = pii - bii;
      const double curv = -pii * pii + 2.0 * pii * bii;
      const double h = std::max(curv, 1e-4 * pii * pii);
      double t = -slope / h;
      bool ok = false;
      for (int halve = 0; halve <= kMaxHalvings; ++halve) {
        const double denom = 1.0 + t * pii;
        if (denom > kDetFloor) {
          const double gain = std::log1p(t * pii) - t * bii / denom;
          if (gain <= 0.0) {
            ok = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!ok || std::abs(t) <= kStepFloor * std::max(1.0, std::abs(omega0(i, i)))) continue;
      const double alpha = t / (1.0 + t * pii);
      const Vector pi = p_mat.col(i);
      const Vector bi = b_mat.col(i);
      const double ch = detail::apply_diag_inverse_update(p_mat, pi, alpha);
      // B <- B - alpha (p_i b_i^T + b_i p_i^T) + alpha^2 B_ii p_i p_i^T
      b_mat.noalias() -= alpha * (pi * bi.transpose() + bi * pi.transpose());
      b_mat.noalias() += (alpha * alpha * bii) * (pi * pi.transpose());
      delta_abs = std::max(delta_abs, std::max(ch, std::abs(t)));
      omega0(i, i) += t;
    }

    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j) {
        const double pii = p_mat(i, i);
        const double pjj = p_mat(j, j);
        const double pij = p_mat(i, j);
        const double bii = b_mat(i, i);
        const double bjj = b_mat(j, j);
        const double bij = b_mat(i, j);
        const double w = omega0(i, j);

        const double slope = 2.0 * (pij - bij);
        const double curv =
            -2.0 * (pij * pij + pii * pjj) + 2.0 * (2.0 * pij * bij + pii * bjj + pjj * bii);
        const double curv_scale = 2.0 * (pij * pij + pii * pjj);
        const double h = std::max(curv, 1e-4 * curv_scale);
        const double u = soft_threshold(w - slope / h, 2.0 * gamma / h);
        double t = u - w;
        if (std::abs(t) <= kStepFloor * std::max(1.0, std::abs(w))) continue;

        bool ok = false;
        detail::PairUpdateCoeffs g{};
        for (int halve = 0; halve <= kMaxHalvings; ++halve) {
          const double excess = detail::pair_det_excess(t, pii, pjj, pij);
          const double d = 1.0 + excess;
          if (d > kDetFloor) {
            g = detail::pair_update_coeffs(t, pii, pjj, pij, d);
            const double dtr = -(g.g11 * bii + 2.0 * g.g12 * bij + g.g22 * bjj);
            const double gain = std::log1p(excess) + dtr + 2.0 * gamma * detail::abs_change(w, t);
            if (gain <= 0.0) {
              ok = true;
              break;
            }
          }
          t *= 0.5;
        }
        if (!ok || std::abs(t) <= kStepFloor * std::max(1.0, std::abs(w))) continue;

        const Vector pi = p_mat.col(i);
        const Vector pj = p_mat.col(j);
        const Vector bi = b_mat.col(i);
        const Vector bj = b_mat.col(j);
        const double ch = detail::apply_pair_inverse_update(p_mat, pi, pj, g);

        // B <- B - W G V^T - V G W^T + W (G Buu G) W^T with W = [p_i p_j], V = [b_i b_j].
        Eigen::Matrix2d gm;
        gm << g.g11, g.g12, g.g12, g.g22;
        Eigen::Matrix2d buu;
        buu << bii, bij, bij, bjj;
        const Eigen::Matrix2d gbg = gm * buu * gm;
        Matrix wcols(p, 2), vcols(p, 2);
        wcols.col(0) = pi;
        wcols.col(1) = pj;
        vcols.col(0) = bi;
        vcols.col(1) = bj;
        b_mat.noalias() -= wcols * (gm * vcols.transpose());
        b_mat.noalias() -= vcols * (gm * wcols.transpose());
        b_mat.noalias() += wcols * (gbg * wcols.transpose());

        delta_abs = std::max(delta_abs, std::max(ch, std::abs(t)));
        omega0(i, j) += t;
        omega0(j, i) += t;
      }
    }

    refresh_state(omega0, a, p_mat, b_mat, log_det);
    report.objective = log_det + a.cwiseProduct(p_mat).sum() + gamma * l1_offdiag(omega0);
    report.final_delta = delta_abs / scale;

    if (report.final_delta <= opts.tol) {
      const double r = kkt_residual(gamma, omega0, p_mat, b_mat);
      if (r <= 10.0 * opts.tol) {
        report.objective_trace.push_back(report.objective);
        report.converged = true;
        break;
      }
      if (delta_abs == 0.0) {
        report.objective_trace.push_back(report.objective);
        break;
      }
    }

    // Extrapolate the last sweep's displacement; accept only on a strict
    // objective decrease (see the matching step in glasso_fit).
    {
      const Matrix direction = omega0 - omega_prev_sweep;
      double best_objective = report.objective;
      Matrix best_omega;
      for (double step = 1.0; step <= 64.0; step *= 2.0) {
        const Matrix candidate = omega0 + step * direction;
        Eigen::LLT<Matrix> llt(candidate);
        if (llt.info() != Eigen::Success) break;
        double ld = 0.0;
        bool pd = true;
        for (Eigen::Index i = 0; i < p; ++i) {
          const double piv = llt.matrixLLT()(i, i);
          if (!(piv > 0.0)) {
            pd = false;
            break;
          }
          ld += std::log(piv);
        }
        if (!pd) break;
        const Matrix solved =
            llt.matrixL().solve(a_chol);  // tr(A candidate^{-1}) = |L^{-1} C|_F^2
        const double f = 2.0 * ld + solved.squaredNorm() + gamma * l1_offdiag(candidate);
        if (f < best_objective) {
          best_objective = f;
          best_omega = candidate;
        }
      }
      if (best_omega.size() > 0) {
        omega0 = std::move(best_omega);
        refresh_state(omega0, a, p_mat, b_mat, log_det);
        report.objective = best_objective;
      }
    }
    report.objective_trace.push_back(report.objective);
    omega_prev_sweep = omega0;
  }

  result.omega0 = std::move(omega0);
  return result;
}

}  // namespace bggm
