#include "bggm/rcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bggm/parallel.hpp"

namespace bggm {

void LambdaTriple::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !(lambda3 >= 0.0)) {
    throw InvalidLambda("tuning parameters must be nonnegative");
  }
  if (lambda3 > 0.0 && lambda2 == 0.0) {
    throw InvalidLambda("lambda3 > 0 requires lambda2 > 0");
  }
}

namespace {

void check_subjects(const std::vector<SubjectData>& subjects) {
  if (subjects.empty()) throw InvalidArgument("need at least one subject");
  const Eigen::Index p = subjects.front().dim();
  for (const SubjectData& s : subjects) {
    if (s.dim() != p) throw DimensionMismatch("subjects have differing dimensions");
  }
}

KktResiduals kkt_impl(const LambdaTriple& lambda, const Matrix& omega0,
                      const std::vector<Matrix>& omegas,
                      const std::vector<Matrix>& sample_covs) {
  const Eigen::Index p = omega0.rows();
  const std::size_t k_count = omegas.size();
  const Matrix sigma0 = inverse_pd(omega0);

  KktResiduals res;
  for (std::size_t k = 0; k < k_count; ++k) {
    const Matrix sigma_k = inverse_pd(omegas[k]);
    const Matrix& s_k = sample_covs[k];
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j) {
        const double e = s_k(i, j) + lambda.lambda2 * sigma0(i, j) -
                         (1.0 + lambda.lambda2) * sigma_k(i, j);
        const double w = omegas[k](i, j);
        double r;
        if (std::abs(w) > kZeroEps) {
          r = std::abs(e + lambda.lambda1 * (w > 0.0 ? 1.0 : -1.0));
        } else {
          r = std::max(0.0, std::abs(e) - lambda.lambda1);
        }
        res.individual = std::max(res.individual, r);
      }
    }
  }

  if (lambda.lambda2 > 0.0) {
    Matrix omega_sum = Matrix::Zero(p, p);
    for (const Matrix& m : omegas) omega_sum += m;
    const Matrix t_mat = sigma0 * omega_sum * sigma0;
    const double ratio = lambda.lambda3 / lambda.lambda2;
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j) {
        const double e = -t_mat(i, j) + static_cast<double>(k_count) * sigma0(i, j);
        const double w = omega0(i, j);
        double r;
        if (std::abs(w) > kZeroEps) {
          r = std::abs(e + ratio * (w > 0.0 ? 1.0 : -1.0));
        } else {
          r = std::max(0.0, std::abs(e) - ratio);
        }
        res.group = std::max(res.group, r);
      }
    }
  }
  return res;
}

double rel_frobenius_change(const Matrix& now, const Matrix& before) {
  return (now - before).norm() / (before.norm() + 1e-12);
}

}  // namespace

double rcm_objective(const Matrix& omega0, const std::vector<Matrix>& omegas,
                     const std::vector<Matrix>& sample_covs, const LambdaTriple& lambda) {
  lambda.validate();
  if (omegas.empty() || omegas.size() != sample_covs.size()) {
    throw DimensionMismatch("rcm_objective: mismatched list lengths");
  }
  const Eigen::Index p = omega0.rows();
  double value = 0.0;
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    if (omegas[k].rows() != p || sample_covs[k].rows() != p) {
      throw DimensionMismatch("rcm_objective: dimension mismatch");
    }
    value += -log_det_pd(omegas[k]) + sample_covs[k].cwiseProduct(omegas[k]).sum();
    value += lambda.lambda1 * l1_offdiag(omegas[k]);
    if (lambda.lambda2 > 0.0) value += lambda.lambda2 * kl_penalty(omegas[k], omega0);
  }
  value += lambda.lambda3 * l1_offdiag(omega0);
  return value;
}

RcmFit rcm_fit(const std::vector<SubjectData>& subjects, const LambdaTriple& lambda,
               const RcmOptions& opts) {
  lambda.validate();
  check_subjects(subjects);
  if (opts.max_bcd_iter < 1) throw InvalidArgument("rcm_fit: max_bcd_iter must be at least 1");
  if (!(opts.bcd_tol > 0.0)) throw InvalidArgument("rcm_fit: bcd_tol must be positive");
  if (!(opts.rho_init > 0.0 && opts.rho_init < 1.0)) {
    throw InvalidArgument("rcm_fit: rho_init must lie in (0, 1)");
  }

  const std::size_t k_count = subjects.size();
  const Eigen::Index p = subjects.front().dim();
  const double l1 = lambda.lambda1;
  const double l2 = lambda.lambda2;
  const double l3 = lambda.lambda3;

  std::vector<Matrix> sample_covs;
  sample_covs.reserve(k_count);
  for (const SubjectData& s : subjects) sample_covs.push_back(s.sample_cov);

  RcmFit fit;
  fit.lambda = lambda;
  fit.group_estimated = l2 > 0.0;

  if (opts.warm) {
    if (opts.warm->omegas.size() != k_count || opts.warm->omega0.rows() != p) {
      throw DimensionMismatch("rcm_fit: warm start shape mismatch");
    }
    fit.omegas = opts.warm->omegas;
    fit.omega0 = opts.warm->omega0;
  } else {
    fit.omegas.reserve(k_count);
    const Matrix identity = Matrix::Identity(p, p);
    for (const SubjectData& s : subjects) {
      Matrix blend = (1.0 - opts.rho_init) * s.sample_cov + opts.rho_init * identity;
      fit.omegas.push_back(opts.init_mode == InitMode::kBlend ? blend : inverse_pd(blend));
    }
    fit.omega0 = order_invariant_mean(fit.omegas);
  }

  // Inner tolerances are capped so the joint stationarity residuals, which
  // rescale the subproblem residuals by (1 + lambda2) and K, stay within
  // 10 * bcd_tol at convergence. Early iterations run the inner solvers
  // loosely (proportional to the last block change); every per-update step
  // is still a descent step, so the objective trace stays monotone, and the
  // convergence test below only passes once the tight tolerances are in
  // force.
  const double tight_glasso_tol = std::min(opts.inner_glasso.tol, opts.bcd_tol / (1.0 + l2));
  const double tight_sc_tol =
      std::min(opts.inner_sparsecov.tol, opts.bcd_tol / static_cast<double>(k_count));
  GlassoOptions glasso_opts = opts.inner_glasso;
  SparseCovOptions sc_opts = opts.inner_sparsecov;

  const double glasso_penalty = l1 / (1.0 + l2);
  double last_delta = std::numeric_limits<double>::infinity();

  while (fit.iterations < opts.max_bcd_iter) {
    ++fit.iterations;
    const double loose = std::min(0.05 * last_delta, 1e-2);
    glasso_opts.tol = std::max(tight_glasso_tol, std::min(loose, 1e-2));
    sc_opts.tol = std::max(tight_sc_tol, std::min(loose, 1e-2));

    // Step 2: per-subject graphical lassos, independent given omega0.
    std::vector<Matrix> new_omegas(k_count);
    const Matrix sigma0 = l2 > 0.0 ? inverse_pd(fit.omega0) : Matrix();
    parallel_for(static_cast<int>(k_count), opts.threads, [&](int k) {
      GlassoOptions local = glasso_opts;
      local.warm_start = fit.omegas[static_cast<std::size_t>(k)];
      const Matrix& s_k = sample_covs[static_cast<std::size_t>(k)];
      const Matrix input = l2 > 0.0 ? Matrix(((s_k + l2 * sigma0) / (1.0 + l2)).eval()) : s_k;
      new_omegas[static_cast<std::size_t>(k)] = glasso_fit(input, glasso_penalty, local).omega;
    });

    // Step 3: group update on the mean of the individual estimates.
    Matrix new_omega0;
    if (l2 > 0.0) {
      SparseCovOptions local = sc_opts;
      local.init = fit.omega0;
      const Matrix mean = order_invariant_mean(new_omegas);
      const double gamma = l3 / (static_cast<double>(k_count) * l2);
      new_omega0 = sparsecov_fit(mean, gamma, local).omega0;
    } else {
      new_omega0 = order_invariant_mean(new_omegas);
    }

    double delta = rel_frobenius_change(new_omega0, fit.omega0);
    for (std::size_t k = 0; k < k_count; ++k) {
      delta = std::max(delta, rel_frobenius_change(new_omegas[k], fit.omegas[k]));
    }

    fit.omegas = std::move(new_omegas);
    fit.omega0 = std::move(new_omega0);
    fit.objective_trace.push_back(rcm_objective(fit.omega0, fit.omegas, sample_covs, lambda));
    last_delta = delta;

    if (delta <= opts.bcd_tol) {
      const KktResiduals res = kkt_impl(lambda, fit.omega0, fit.omegas, sample_covs);
      if (res.individual <= 10.0 * opts.bcd_tol && res.group <= 10.0 * opts.bcd_tol) {
        fit.converged = true;
        break;
      }
    }
  }

  return fit;
}

KktResiduals rcm_kkt(const RcmFit& fit, const std::vector<Matrix>& sample_covs) {
  if (fit.omegas.empty() || fit.omegas.size() != sample_covs.size()) {
    throw DimensionMismatch("rcm_kkt: mismatched list lengths");
  }
  return kkt_impl(fit.lambda, fit.omega0, fit.omegas, sample_covs);
}

int count_offdiag_nonzero(const Matrix& m) {
  int count = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j)) > kZeroEps) ++count;
    }
  }
  return count;
}

double degrees_of_freedom(const RcmFit& fit) {
  const double l2 = fit.lambda.lambda2;
  double df_individuals = 0.0;
  for (const Matrix& m : fit.omegas) df_individuals += count_offdiag_nonzero(m);
  const double df0 = count_offdiag_nonzero(fit.omega0);
  return df_individuals / (1.0 + l2) + l2 * df0 / (1.0 + l2);
}

double bic1(const RcmFit& fit, const std::vector<SubjectData>& subjects) {
  if (fit.omegas.size() != subjects.size()) throw DimensionMismatch("bic1: mismatched lists");
  double value = 0.0;
  for (std::size_t k = 0; k < subjects.size(); ++k) {
    const Matrix& s_k = subjects[k].sample_cov;
    if (s_k.rows() != fit.omegas[k].rows()) throw DimensionMismatch("bic1: dimension mismatch");
    const double n_k = static_cast<double>(subjects[k].sample_size());
    const double df_k = count_offdiag_nonzero(fit.omegas[k]);
    value += n_k * (s_k.cwiseProduct(fit.omegas[k]).sum() - log_det_pd(fit.omegas[k])) +
             df_k * std::log(n_k);
  }
  return value;
}

double bic2(const RcmFit& fit, const std::vector<SubjectData>& subjects) {
  if (fit.omegas.size() != subjects.size()) throw DimensionMismatch("bic2: mismatched lists");
  const Eigen::Index n = subjects.front().sample_size();
  for (const SubjectData& s : subjects) {
    if (s.sample_size() != n) {
      throw UnequalSampleSizes("bic2 is defined only for equal sample sizes");
    }
  }
  double value = 0.0;
  for (std::size_t k = 0; k < subjects.size(); ++k) {
    const Matrix& s_k = subjects[k].sample_cov;
    if (s_k.rows() != fit.omegas[k].rows()) throw DimensionMismatch("bic2: dimension mismatch");
    value += static_cast<double>(n) *
             (s_k.cwiseProduct(fit.omegas[k]).sum() - log_det_pd(fit.omegas[k]));
  }
  const double total_n = static_cast<double>(subjects.size()) * static_cast<double>(n);
  return value + degrees_of_freedom(fit) * std::log(total_n);
}

}  // namespace bggm
