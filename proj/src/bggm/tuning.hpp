#pragma once

#include <vector>

#include "bggm/rcm.hpp"

namespace bggm {

enum class Criterion { kBic1, kBic2 };

struct LambdaGrid {
  std::vector<double> lambda1_values;
  std::vector<double> lambda2_values;
  std::vector<double> lambda3_values;

  /// Each list non-empty, nonnegative, strictly ascending.
  void validate() const;
};

struct TuneEntry {
  LambdaTriple lambda;
  double bic = 0.0;
  double df = 0.0;
  bool converged = false;
};

struct TuneResult {
  RcmFit best;
  Criterion criterion = Criterion::kBic2;
  std::vector<TuneEntry> table;            // feasible points, sorted by bic ascending
  std::vector<LambdaTriple> infeasible;    // skipped (lambda2 = 0, lambda3 > 0) combinations
};

/// Grid search with one rcm_fit per feasible grid point. Within a fixed
/// (lambda2, lambda3) slice the lambda1 values are visited in descending
/// order with warm starts; distinct slices may run in parallel. The best
/// entry minimizes the criterion among converged fits, ties broken toward
/// larger (lambda1, lambda3, lambda2) lexicographically (sparser model).
TuneResult tune(const std::vector<SubjectData>& subjects, const LambdaGrid& grid,
                Criterion criterion, const RcmOptions& opts = {});

/// Ten log-spaced lambda1 values geometrically centered at sqrt(log(p)/n),
/// spanning a factor of 10 on each side; lambda2 and lambda3 each
/// {0.1, 0.5, 1, 2, 5}.
LambdaGrid default_grid(int p, int n);

}  // namespace bggm
