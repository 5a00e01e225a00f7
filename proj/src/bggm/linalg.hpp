#pragma once

#include <Eigen/Dense>

#include "bggm/errors.hpp"

namespace bggm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Entries with |value| above this threshold count as nonzero when reading
/// edges or degrees of freedom off a precision matrix. Coordinate-descent
/// solvers produce exact zeros; the threshold only guards float noise.
inline constexpr double kZeroEps = 1e-8;

bool all_finite(const Matrix& a);

/// Validates a square matrix of dimension >= 2 and returns (A + A^T)/2.
/// Inputs whose asymmetry exceeds 1e-8 * max|entry| are rejected.
Matrix symmetrized(const Matrix& a);

/// Sample covariance of an n x p observation matrix: columns are centered to
/// mean zero, then S = Y^T Y / n. Eigenvalues below zero but above
/// -1e-8 * max diagonal are clamped to zero; anything lower is rejected.
Matrix sample_covariance(const Matrix& observations);

/// log det A for symmetric positive definite A, via Cholesky.
double log_det_pd(const Matrix& a);

/// A^{-1} for symmetric positive definite A, via Cholesky.
Matrix inverse_pd(const Matrix& a);

/// -log det(Omega_k Omega_0^{-1}) + tr(Omega_k Omega_0^{-1}) - p.
/// Nonnegative; zero exactly when the two matrices coincide.
double kl_penalty(const Matrix& omega_k, const Matrix& omega0);

/// Sum of |a_ij| over all ordered pairs i != j (both triangles).
double l1_offdiag(const Matrix& a);

/// sign(x) * max(|x| - t, 0) for t >= 0.
double soft_threshold(double x, double t);

/// Entrywise mean of K equally sized matrices, accumulated in ascending
/// value order per entry so the result does not depend on the order of the
/// inputs (bit-for-bit permutation equivariance).
Matrix order_invariant_mean(const std::vector<Matrix>& mats);

/// One sub-dataset: observation matrix plus its cached sample covariance.
struct SubjectData {
  Matrix observations;  // n_k x p
  Matrix sample_cov;    // p x p

  static SubjectData from_observations(Matrix observations);

  Eigen::Index sample_size() const { return observations.rows(); }
  Eigen::Index dim() const { return sample_cov.rows(); }
};

}  // namespace bggm
