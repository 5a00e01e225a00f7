#pragma once

#include <vector>

#include "bggm/linalg.hpp"
#include "bggm/simgen.hpp"

namespace bggm {

struct EdgeConfusion {
  double tpr = 0.0;
  double fpr = 0.0;
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;
};

/// Confusion over all p(p-1)/2 unordered pairs. Rates are 0 when their
/// denominator is empty.
EdgeConfusion edge_confusion(const EdgeSet& estimated, const EdgeSet& truth);

struct EstimationError {
  double frobenius = 0.0;
  double entrywise_l1 = 0.0;
};

/// Frobenius and entrywise absolute-sum norms of estimate - truth, over all
/// entries including the diagonal unless offdiag_only is set.
EstimationError estimation_error(const Matrix& estimate, const Matrix& truth,
                                 bool offdiag_only = false);

/// Edge included iff present in strictly more than half of the inputs.
EdgeSet majority_vote_group(const std::vector<EdgeSet>& adjacencies);

/// Entry (j, jp) is the fraction of inputs containing that edge; symmetric
/// with zero diagonal.
Matrix mean_adjacency(const std::vector<EdgeSet>& adjacencies);

/// Edges of a precision matrix: off-diagonal pairs with |entry| > eps.
EdgeSet edges_from_precision(const Matrix& omega, double eps = kZeroEps);

}  // namespace bggm
