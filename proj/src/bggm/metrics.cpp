#include "bggm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bggm {

EdgeConfusion edge_confusion(const EdgeSet& estimated, const EdgeSet& truth) {
  if (estimated.p != truth.p) throw DimensionMismatch("edge_confusion: dimension mismatch");
  EdgeSet est = estimated;
  est.normalize();
  EdgeSet tru = truth;
  tru.normalize();

  long tp = 0;
  auto it = tru.edges.begin();
  for (const auto& e : est.edges) {
    it = std::lower_bound(it, tru.edges.end(), e);
    if (it != tru.edges.end() && *it == e) {
      ++tp;
      ++it;
    }
  }

  EdgeConfusion c;
  c.tp = tp;
  c.fp = static_cast<long>(est.edges.size()) - tp;
  c.fn = static_cast<long>(tru.edges.size()) - tp;
  const long total = static_cast<long>(estimated.p) * (estimated.p - 1) / 2;
  c.tn = total - c.tp - c.fp - c.fn;
  c.tpr = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
  c.fpr = (c.fp + c.tn) > 0 ? static_cast<double>(c.fp) / (c.fp + c.tn) : 0.0;
  return c;
}

EstimationError estimation_error(const Matrix& estimate, const Matrix& truth,
                                 bool offdiag_only) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw DimensionMismatch("estimation_error: dimension mismatch");
  }
  EstimationError err;
  double sq = 0.0;
  for (Eigen::Index j = 0; j < estimate.cols(); ++j) {
    for (Eigen::Index i = 0; i < estimate.rows(); ++i) {
      if (offdiag_only && i == j) continue;
      const double d = estimate(i, j) - truth(i, j);
      sq += d * d;
      err.entrywise_l1 += std::abs(d);
    }
  }
  err.frobenius = std::sqrt(sq);
  return err;
}

EdgeSet majority_vote_group(const std::vector<EdgeSet>& adjacencies) {
  if (adjacencies.empty()) throw InvalidArgument("majority_vote_group: empty input");
  const int p = adjacencies.front().p;
  const auto k = static_cast<long>(adjacencies.size());
  std::map<std::pair<int, int>, long> counts;
  for (const EdgeSet& a : adjacencies) {
    if (a.p != p) throw DimensionMismatch("majority_vote_group: dimension mismatch");
    for (const auto& e : a.edges) ++counts[e];
  }
  EdgeSet out;
  out.p = p;
  for (const auto& [edge, count] : counts) {
    if (2 * count > k) out.edges.push_back(edge);
  }
  out.normalize();
  return out;
}

Matrix mean_adjacency(const std::vector<EdgeSet>& adjacencies) {
  if (adjacencies.empty()) throw InvalidArgument("mean_adjacency: empty input");
  const int p = adjacencies.front().p;
  Matrix out = Matrix::Zero(p, p);
  for (const EdgeSet& a : adjacencies) {
    if (a.p != p) throw DimensionMismatch("mean_adjacency: dimension mismatch");
    for (const auto& [j, jp] : a.edges) {
      out(j, jp) += 1.0;
      out(jp, j) += 1.0;
    }
  }
  out /= static_cast<double>(adjacencies.size());
  return out;
}

EdgeSet edges_from_precision(const Matrix& omega, double eps) {
  if (omega.rows() != omega.cols()) throw DimensionMismatch("edges_from_precision: not square");
  EdgeSet out;
  out.p = static_cast<int>(omega.rows());
  for (int i = 0; i < out.p; ++i) {
    for (int j = i + 1; j < out.p; ++j) {
      if (std::abs(omega(i, j)) > eps) out.edges.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace bggm
