#pragma once

#include <optional>
#include <vector>

#include "bggm/glasso.hpp"
#include "bggm/linalg.hpp"
#include "bggm/sparsecov.hpp"

namespace bggm {

struct LambdaTriple {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;

  /// All nonnegative; lambda3 > 0 requires lambda2 > 0 (the group update's
  /// penalty weight is lambda3 / (K * lambda2)).
  void validate() const;
};

enum class InitMode {
  kBlend,         // Omega_k = (1 - rho) S_k + rho I
  kInverseBlend,  // Omega_k = ((1 - rho) S_k + rho I)^{-1}
};

/// Explicit starting point, used for warm starts along a tuning path.
struct RcmState {
  Matrix omega0;
  std::vector<Matrix> omegas;
};

struct RcmOptions {
  int max_bcd_iter = 100;
  double bcd_tol = 1e-4;  // max relative Frobenius change of any matrix per iteration
  double rho_init = 0.1;  // blend weight of the identity in the initializer
  InitMode init_mode = InitMode::kBlend;
  GlassoOptions inner_glasso;
  SparseCovOptions inner_sparsecov;
  int threads = 1;  // parallelism budget for the per-subject updates; 0 = auto
  std::optional<RcmState> warm;
};

struct RcmFit {
  Matrix omega0;               // group precision
  std::vector<Matrix> omegas;  // individual precisions
  LambdaTriple lambda;
  std::vector<double> objective_trace;  // one value per BCD iteration
  int iterations = 0;
  bool converged = false;
  bool group_estimated = true;  // false when lambda2 = 0 (omega0 is a plain average)
};

/// Penalized negative log-likelihood of the joint model:
///   sum_k [ -log det(Omega_k) + tr(S_k Omega_k) ]
///   + lambda1 * sum_k l1_offdiag(Omega_k)
///   + lambda2 * sum_k kl_penalty(Omega_k, Omega0)
///   + lambda3 * l1_offdiag(Omega0).
double rcm_objective(const Matrix& omega0, const std::vector<Matrix>& omegas,
                     const std::vector<Matrix>& sample_covs, const LambdaTriple& lambda);

/// Block coordinate descent. Starting from Omega_k = (1-rho) S_k + rho I and
/// Omega0 = mean_k Omega_k, each iteration updates every Omega_k by a
/// graphical lasso on (S_k + lambda2 Omega0^{-1}) / (1 + lambda2) with
/// penalty lambda1 / (1 + lambda2), warm-started at the previous iterate,
/// then updates Omega0 by the sparse covariance solver on mean_k Omega_k
/// with penalty lambda3 / (K lambda2). With lambda2 = 0 the model decouples:
/// Omega0 is reported as the plain average and never optimized. The
/// objective trace is non-increasing; convergence additionally requires the
/// stationarity residuals of rcm_kkt to fall below 10 * bcd_tol.
RcmFit rcm_fit(const std::vector<SubjectData>& subjects, const LambdaTriple& lambda,
               const RcmOptions& opts = {});

struct KktResiduals {
  double individual = 0.0;
  double group = 0.0;
};

/// Max off-diagonal stationarity violations of the joint objective at the
/// fit, per level. Individual: |s_k + lambda2 sigma0 - (1+lambda2) sigma_k|
/// entries combined with the lambda1 subdifferential; group:
/// |K sigma0 - sum_k (Sigma0 Omega_k Sigma0)| entries combined with the
/// (lambda3/lambda2) subdifferential. The group residual is zero by
/// definition when lambda2 = 0.
KktResiduals rcm_kkt(const RcmFit& fit, const std::vector<Matrix>& sample_covs);

/// Number of nonzero off-diagonal pairs (j < j', |entry| > kZeroEps).
int count_offdiag_nonzero(const Matrix& m);

/// sum_k df_k / (1 + lambda2) + lambda2 * df_0 / (1 + lambda2), where df_k
/// and df_0 count nonzero off-diagonal pairs. Interpolates between
/// sum_k df_k at lambda2 = 0 and df_0 as lambda2 grows.
double degrees_of_freedom(const RcmFit& fit);

/// Per-subject criterion: sum_k [ n_k (tr(S_k Omega_k) - log det(Omega_k))
/// + df_k log(n_k) ]. The likelihood term carries its sample size, as in
/// the usual -2 log-likelihood scaling; without it the df term would
/// dominate at any realistic n and selection would collapse to diagonal
/// models.
double bic1(const RcmFit& fit, const std::vector<SubjectData>& subjects);

/// Hierarchical criterion: sum_k n (tr(S_k Omega_k) - log det(Omega_k))
/// + df log(K n), with the blended degrees of freedom. Requires equal
/// sample sizes across subjects.
double bic2(const RcmFit& fit, const std::vector<SubjectData>& subjects);

}  // namespace bggm
