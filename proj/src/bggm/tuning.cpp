#include "bggm/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "bggm/parallel.hpp"

namespace bggm {

namespace {

void validate_values(const std::vector<double>& values, const char* name) {
  if (values.empty()) throw InvalidArgument(std::string(name) + " grid values must be non-empty");
  double prev = -1.0;
  for (double v : values) {
    if (!(v >= 0.0)) throw InvalidArgument(std::string(name) + " grid values must be nonnegative");
    if (v <= prev) throw InvalidArgument(std::string(name) + " grid values must be ascending");
    prev = v;
  }
}

// Sort key: smaller bic first; on ties prefer larger (lambda1, lambda3, lambda2).
bool entry_less(const TuneEntry& a, const TuneEntry& b) {
  return std::make_tuple(a.bic, -a.lambda.lambda1, -a.lambda.lambda3, -a.lambda.lambda2) <
         std::make_tuple(b.bic, -b.lambda.lambda1, -b.lambda.lambda3, -b.lambda.lambda2);
}

}  // namespace

void LambdaGrid::validate() const {
  validate_values(lambda1_values, "lambda1");
  validate_values(lambda2_values, "lambda2");
  validate_values(lambda3_values, "lambda3");
}

TuneResult tune(const std::vector<SubjectData>& subjects, const LambdaGrid& grid,
                Criterion criterion, const RcmOptions& opts) {
  grid.validate();
  if (subjects.empty()) throw InvalidArgument("tune: need at least one subject");
  if (criterion == Criterion::kBic2) {
    const Eigen::Index n = subjects.front().sample_size();
    for (const SubjectData& s : subjects) {
      if (s.sample_size() != n) {
        throw UnequalSampleSizes("tune: BIC2 requires equal sample sizes");
      }
    }
  }

  struct Slice {
    double lambda2 = 0.0;
    double lambda3 = 0.0;
  };
  std::vector<Slice> slices;
  TuneResult result;
  result.criterion = criterion;
  for (double l2 : grid.lambda2_values) {
    for (double l3 : grid.lambda3_values) {
      if (l2 == 0.0 && l3 > 0.0) {
        for (double l1 : grid.lambda1_values) {
          result.infeasible.push_back({l1, l2, l3});
        }
        continue;
      }
      slices.push_back({l2, l3});
    }
  }
  if (slices.empty()) throw EmptyFeasibleGrid("tune: no feasible grid point");

  struct SliceOutput {
    std::vector<TuneEntry> entries;
    RcmFit best_fit;
    bool has_best = false;
    TuneEntry best_entry;
  };
  std::vector<SliceOutput> outputs(slices.size());

  // Warm-start chains are sequential within a slice; slices are independent.
  const bool parallel_slices = slices.size() > 1;
  RcmOptions fit_opts = opts;
  if (parallel_slices) fit_opts.threads = 1;

  parallel_for(static_cast<int>(slices.size()), parallel_slices ? opts.threads : 1, [&](int si) {
    const Slice slice = slices[static_cast<std::size_t>(si)];
    SliceOutput& out = outputs[static_cast<std::size_t>(si)];
    RcmOptions chain_opts = fit_opts;
    chain_opts.warm.reset();
    for (auto it = grid.lambda1_values.rbegin(); it != grid.lambda1_values.rend(); ++it) {
      const LambdaTriple lambda{*it, slice.lambda2, slice.lambda3};
      RcmFit fit = rcm_fit(subjects, lambda, chain_opts);
      chain_opts.warm = RcmState{fit.omega0, fit.omegas};

      TuneEntry entry;
      entry.lambda = lambda;
      entry.df = degrees_of_freedom(fit);
      entry.bic = criterion == Criterion::kBic1 ? bic1(fit, subjects) : bic2(fit, subjects);
      entry.converged = fit.converged;
      out.entries.push_back(entry);

      if (entry.converged && (!out.has_best || entry_less(entry, out.best_entry))) {
        out.has_best = true;
        out.best_entry = entry;
        out.best_fit = std::move(fit);
      }
    }
  });

  bool has_best = false;
  TuneEntry best_entry;
  for (SliceOutput& out : outputs) {
    for (const TuneEntry& e : out.entries) result.table.push_back(e);
    if (out.has_best && (!has_best || entry_less(out.best_entry, best_entry))) {
      has_best = true;
      best_entry = out.best_entry;
      result.best = std::move(out.best_fit);
    }
  }
  if (!has_best) throw EmptyFeasibleGrid("tune: no grid point converged");

  std::sort(result.table.begin(), result.table.end(), entry_less);
  return result;
}

LambdaGrid default_grid(int p, int n) {
  if (p < 2 || n < 2) throw DimensionTooSmall("default_grid: p and n must be at least 2");
  LambdaGrid grid;
  const double center = std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
  const int count = 10;
  const double lo = center / 10.0;
  const double hi = center * 10.0;
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    grid.lambda1_values.push_back(lo * std::pow(hi / lo, f));
  }
  grid.lambda2_values = {0.1, 0.5, 1.0, 2.0, 5.0};
  grid.lambda3_values = {0.1, 0.5, 1.0, 2.0, 5.0};
  return grid;
}

}  // namespace bggm
