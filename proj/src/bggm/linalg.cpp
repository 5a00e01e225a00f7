#include "bggm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bggm {

bool all_finite(const Matrix& a) {
  return a.allFinite();
}

Matrix symmetrized(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("matrix is not square");
  if (a.rows() < 2) throw DimensionTooSmall("matrix dimension must be at least 2");
  if (!all_finite(a)) throw NonFiniteInput("matrix has NaN or Inf entries");
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * std::max(scale, 1e-300)) {
    throw InvalidArgument("matrix asymmetry exceeds tolerance");
  }
  return 0.5 * (a + a.transpose());
}

Matrix sample_covariance(const Matrix& observations) {
  const Eigen::Index n = observations.rows();
  const Eigen::Index p = observations.cols();
  if (n < 2 || p < 2) throw DimensionTooSmall("need at least 2 rows and 2 columns");
  if (!all_finite(observations)) throw NonFiniteInput("observations have NaN or Inf entries");

  Matrix centered = observations.rowwise() - observations.colwise().mean();
  Matrix s = (centered.transpose() * centered) / static_cast<double>(n);
  s = 0.5 * (s + s.transpose());

  const double max_diag = s.diagonal().maxCoeff();
  const double eps_psd = 1e-8 * std::max(max_diag, 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  if (eig.info() != Eigen::Success) throw NotPositiveDefinite("eigendecomposition failed");
  const Vector& ev = eig.eigenvalues();
  if (ev.minCoeff() < -eps_psd) {
    throw NotPositiveDefinite("sample covariance has a negative eigenvalue beyond tolerance");
  }
  if (ev.minCoeff() < 0.0) {
    Vector clamped = ev.cwiseMax(0.0);
    s = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    s = 0.5 * (s + s.transpose());
  }
  return s;
}

namespace {

// Cholesky factor or throw; shared by log_det_pd / inverse_pd.
Eigen::LLT<Matrix> llt_pd(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("matrix is not square");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Cholesky factorization failed");
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
      throw NotPositiveDefinite("Cholesky factorization has a nonpositive pivot");
    }
  }
  return llt;
}

}  // namespace

double log_det_pd(const Matrix& a) {
  const auto llt = llt_pd(a);
  double ld = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) ld += std::log(llt.matrixLLT()(i, i));
  return 2.0 * ld;
}

Matrix inverse_pd(const Matrix& a) {
  const auto llt = llt_pd(a);
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  return 0.5 * (inv + inv.transpose());
}

double kl_penalty(const Matrix& omega_k, const Matrix& omega0) {
  if (omega_k.rows() != omega0.rows() || omega_k.cols() != omega0.cols()) {
    throw DimensionMismatch("kl_penalty: dimension mismatch");
  }
  const Eigen::Index p = omega_k.rows();
  const double ld_k = log_det_pd(omega_k);
  const double ld_0 = log_det_pd(omega0);
  const Matrix sigma0 = inverse_pd(omega0);
  const double tr = omega_k.cwiseProduct(sigma0).sum();
  return -(ld_k - ld_0) + tr - static_cast<double>(p);
}

double l1_offdiag(const Matrix& a) {
  // Twice the upper triangle; exact for symmetric input.
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) sum += std::abs(a(i, j));
  }
  return 2.0 * sum;
}

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

Matrix order_invariant_mean(const std::vector<Matrix>& mats) {
  if (mats.empty()) throw InvalidArgument("mean of an empty list");
  const Eigen::Index p = mats.front().rows();
  const Eigen::Index q = mats.front().cols();
  for (const Matrix& m : mats) {
    if (m.rows() != p || m.cols() != q) throw DimensionMismatch("mean: dimension mismatch");
  }
  const std::size_t k = mats.size();
  Matrix out(p, q);
  std::vector<double> buf(k);
  for (Eigen::Index c = 0; c < q; ++c) {
    for (Eigen::Index r = 0; r < p; ++r) {
      for (std::size_t m = 0; m < k; ++m) buf[m] = mats[m](r, c);
      std::sort(buf.begin(), buf.end());
      double sum = 0.0;
      for (double v : buf) sum += v;
      out(r, c) = sum / static_cast<double>(k);
    }
  }
  return out;
}

SubjectData SubjectData::from_observations(Matrix observations) {
  SubjectData d;
  d.sample_cov = sample_covariance(observations);
  d.observations = std::move(observations);
  return d;
}

}  // namespace bggm
