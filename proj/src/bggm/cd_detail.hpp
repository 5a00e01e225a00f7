#pragma once

// Internal helpers for the entrywise coordinate-descent solvers. Both
// solvers walk symmetric entry pairs of a positive definite iterate Omega
// while maintaining P = Omega^{-1} through low-rank updates.
//
// For the symmetric pair direction E = e_i e_j^T + e_j e_i^T,
//   det(Omega + t E) = det(Omega) * d(t),
//   d(t) = 1 + 2 t P_ij + t^2 (P_ij^2 - P_ii P_jj),
// and d is concave with d(0) = 1, so Omega + t E stays positive definite
// exactly while d(t) > 0.

#include <cmath>

#include "bggm/linalg.hpp"

namespace bggm::detail {

inline double pair_det_ratio(double t, double pii, double pjj, double pij) {
  return 1.0 + 2.0 * t * pij + t * t * (pij * pij - pii * pjj);
}

// d(t) - 1, kept separate so log d(t) can be evaluated as log1p without
// absorbing the small excess into 1.0 (the per-step objective gains near a
// solution are quadratically small in the residual).
inline double pair_det_excess(double t, double pii, double pjj, double pij) {
  return t * (2.0 * pij + t * (pij * pij - pii * pjj));
}

// |w + t| - |w| without cancellation when the sign does not flip.
inline double abs_change(double w, double t) {
  const double moved = w + t;
  if (w > 0.0 && moved > 0.0) return t;
  if (w < 0.0 && moved < 0.0) return -t;
  return std::abs(moved) - std::abs(w);
}

// Coefficients of the rank-2 inverse update
//   P <- P - [p_i p_j] G [p_i p_j]^T
// after Omega(i,j) and Omega(j,i) change by t. Valid whenever d > 0.
struct PairUpdateCoeffs {
  double g11, g12, g22;
};

inline PairUpdateCoeffs pair_update_coeffs(double t, double pii, double pjj, double pij,
                                           double d) {
  PairUpdateCoeffs g;
  g.g11 = -t * t * pjj / d;
  g.g12 = (t + t * t * pij) / d;
  g.g22 = -t * t * pii / d;
  return g;
}

// Applies P -= pi*v1^T + pj*v2^T with v1 = g11*pi + g12*pj, v2 = g12*pi + g22*pj.
// Returns the largest absolute entry change.
inline double apply_pair_inverse_update(Matrix& p_mat, const Vector& pi, const Vector& pj,
                                        const PairUpdateCoeffs& g) {
  const Eigen::Index p = p_mat.rows();
  Vector v1 = g.g11 * pi + g.g12 * pj;
  Vector v2 = g.g12 * pi + g.g22 * pj;
  double max_change = 0.0;
  for (Eigen::Index c = 0; c < p; ++c) {
    const double a1 = v1[c];
    const double a2 = v2[c];
    double* col = p_mat.col(c).data();
    for (Eigen::Index r = 0; r < p; ++r) {
      const double delta = pi[r] * a1 + pj[r] * a2;
      col[r] -= delta;
      const double ad = std::abs(delta);
      if (ad > max_change) max_change = ad;
    }
  }
  return max_change;
}

// Rank-1 analogue for a diagonal step Omega(i,i) += t:
//   P <- P - alpha * p_i p_i^T, alpha = t / (1 + t P_ii).
inline double apply_diag_inverse_update(Matrix& p_mat, const Vector& pi, double alpha) {
  const Eigen::Index p = p_mat.rows();
  double max_change = 0.0;
  for (Eigen::Index c = 0; c < p; ++c) {
    const double a = alpha * pi[c];
    double* col = p_mat.col(c).data();
    for (Eigen::Index r = 0; r < p; ++r) {
      const double delta = pi[r] * a;
      col[r] -= delta;
      const double ad = std::abs(delta);
      if (ad > max_change) max_change = ad;
    }
  }
  return max_change;
}

}  // namespace bggm::detail
