#include "bggm/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "bggm/rng.hpp"

namespace bggm {

namespace {

// Stream ids for deriving independent sub-seeds from the scenario seed.
constexpr std::uint64_t kStreamGroupGraph = 1;
constexpr std::uint64_t kStreamGroupValues = 2;
constexpr std::uint64_t kStreamSubjectEdges = 3;
constexpr std::uint64_t kStreamSubjectValues = 4;
constexpr std::uint64_t kStreamSubjectData = 5;

constexpr double kEigenvalueMargin = 0.05;

std::uint64_t subject_seed(std::uint64_t seed, std::uint64_t stream, int k) {
  return mix_seed(mix_seed(seed, stream), static_cast<std::uint64_t>(k) + 1);
}

std::int64_t pair_count(int p) {
  return static_cast<std::int64_t>(p) * (p - 1) / 2;
}

// Linear index over pairs (i, j), i < j, ordered row-major.
std::pair<int, int> decode_pair(std::int64_t idx, int p) {
  int i = 0;
  std::int64_t remaining = idx;
  while (remaining >= p - 1 - i) {
    remaining -= p - 1 - i;
    ++i;
  }
  return {i, i + 1 + static_cast<int>(remaining)};
}

using EdgeValues = std::map<std::pair<int, int>, double>;

Matrix precision_from_values(int p, const EdgeValues& values) {
  Matrix prec = Matrix::Identity(p, p);
  if (values.empty()) return prec;

  std::vector<int> degree(static_cast<std::size_t>(p), 0);
  for (const auto& [edge, value] : values) {
    ++degree[static_cast<std::size_t>(edge.first)];
    ++degree[static_cast<std::size_t>(edge.second)];
  }
  for (const auto& [edge, value] : values) {
    const auto [i, j] = edge;
    if (degree[static_cast<std::size_t>(i)] == 0 || degree[static_cast<std::size_t>(j)] == 0) {
      throw InvalidArgument("generate_precision: zero row count on a row with edges");
    }
    // Row-wise division of the asymmetric draw followed by (A + A^T)/2.
    const double w = 0.5 * value *
                     (1.0 / degree[static_cast<std::size_t>(i)] +
                      1.0 / degree[static_cast<std::size_t>(j)]);
    prec(i, j) = w;
    prec(j, i) = w;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(prec);
  if (eig.info() != Eigen::Success) throw NotPositiveDefinite("eigendecomposition failed");
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < kEigenvalueMargin) {
    const double c = (1.0 - kEigenvalueMargin) / (1.0 - min_eig);
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        if (i != j) prec(i, j) *= c;
      }
    }
  }
  return prec;
}

EdgeValues draw_edge_values(const EdgeSet& edges, double lo, double hi, RngStream& stream) {
  EdgeValues values;
  for (const auto& e : edges.edges) {
    values[e] = stream.signed_uniform(lo, hi);
  }
  return values;
}

}  // namespace

bool EdgeSet::contains(int j, int jp) const {
  if (j > jp) std::swap(j, jp);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(j, jp));
}

void EdgeSet::normalize() {
  for (auto& [j, jp] : edges) {
    if (j == jp) throw InvalidArgument("EdgeSet: self-loop");
    if (j > jp) std::swap(j, jp);
    if (j < 0 || jp >= p) throw InvalidArgument("EdgeSet: node index out of range");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

void SimScenario::validate() const {
  if (p < 2) throw DimensionTooSmall("scenario: p must be at least 2");
  if (k_subjects < 1) throw InvalidArgument("scenario: K must be at least 1");
  if (n < 2) throw DimensionTooSmall("scenario: n must be at least 2");
  if (!(rho_diff >= 0.0 && rho_diff < 1.0)) {
    throw InvalidArgument("scenario: rho_diff must lie in [0, 1)");
  }
  if (!(value_lo > 0.0 && value_lo < value_hi)) {
    throw InvalidArgument("scenario: need 0 < value_lo < value_hi");
  }
  if (graph_model == GraphModel::kErdosRenyi && !(er_edge_prob >= 0.0 && er_edge_prob <= 1.0)) {
    throw InvalidArgument("scenario: er_edge_prob must lie in [0, 1]");
  }
  if (graph_model == GraphModel::kExplicit && explicit_edges.p != p) {
    throw DimensionMismatch("scenario: explicit edge set dimension differs from p");
  }
}

EdgeSet generate_group_graph(const SimScenario& scenario) {
  scenario.validate();
  EdgeSet out;
  out.p = scenario.p;

  switch (scenario.graph_model) {
    case GraphModel::kExplicit: {
      out = scenario.explicit_edges;
      out.normalize();
      return out;
    }
    case GraphModel::kScaleFree: {
      RngStream stream(mix_seed(scenario.seed, kStreamGroupGraph));
      std::vector<std::int64_t> degree(static_cast<std::size_t>(scenario.p), 0);
      for (int v = 1; v < scenario.p; ++v) {
        // Attachment weight degree + 1; total weight = 2(v-1) + v.
        std::int64_t total = 0;
        for (int u = 0; u < v; ++u) total += degree[static_cast<std::size_t>(u)] + 1;
        std::int64_t r = stream.uniform_int(total);
        int target = 0;
        for (int u = 0; u < v; ++u) {
          r -= degree[static_cast<std::size_t>(u)] + 1;
          if (r < 0) {
            target = u;
            break;
          }
        }
        out.edges.emplace_back(std::min(target, v), std::max(target, v));
        ++degree[static_cast<std::size_t>(target)];
        ++degree[static_cast<std::size_t>(v)];
      }
      out.normalize();
      return out;
    }
    case GraphModel::kErdosRenyi: {
      RngStream stream(mix_seed(scenario.seed, kStreamGroupGraph));
      for (int i = 0; i < scenario.p; ++i) {
        for (int j = i + 1; j < scenario.p; ++j) {
          if (stream.uniform() < scenario.er_edge_prob) out.edges.emplace_back(i, j);
        }
      }
      out.normalize();
      return out;
    }
  }
  throw InvalidArgument("unknown graph model");
}

Matrix generate_precision(const EdgeSet& edges, double value_lo, double value_hi,
                          std::uint64_t seed) {
  if (edges.p < 1) throw InvalidArgument("generate_precision: empty edge set dimension");
  EdgeSet sorted = edges;
  sorted.normalize();
  RngStream stream(seed);
  const EdgeValues values = draw_edge_values(sorted, value_lo, value_hi, stream);
  return precision_from_values(sorted.p, values);
}

EdgeSet perturb_edges(const EdgeSet& group, double rho_diff, std::uint64_t seed) {
  EdgeSet out = group;
  out.normalize();
  if (rho_diff < 0.0) throw InvalidArgument("perturb_edges: rho_diff must be nonnegative");

  const std::int64_t total = pair_count(group.p);
  const auto count =
      static_cast<std::int64_t>(std::floor(rho_diff * static_cast<double>(out.edges.size()) + 0.5));
  if (count > total) throw InvalidArgument("perturb_edges: toggle count exceeds available pairs");
  if (count == 0) return out;

  // First `count` entries of a seeded shuffle of all pairs.
  RngStream stream(seed);
  std::vector<std::int64_t> indices(static_cast<std::size_t>(total));
  std::iota(indices.begin(), indices.end(), std::int64_t{0});
  for (std::int64_t i = 0; i < count; ++i) {
    const std::int64_t j = i + stream.uniform_int(total - i);
    std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
  }

  for (std::int64_t i = 0; i < count; ++i) {
    const auto [a, b] = decode_pair(indices[static_cast<std::size_t>(i)], group.p);
    const auto edge = std::make_pair(a, b);
    auto it = std::lower_bound(out.edges.begin(), out.edges.end(), edge);
    if (it != out.edges.end() && *it == edge) {
      out.edges.erase(it);
    } else {
      out.edges.insert(it, edge);
    }
  }
  return out;
}

SimTruth generate_scenario(const SimScenario& scenario) {
  scenario.validate();
  SimTruth truth;
  truth.group_edges = generate_group_graph(scenario);

  RngStream group_value_stream(mix_seed(scenario.seed, kStreamGroupValues));
  const EdgeValues group_values =
      draw_edge_values(truth.group_edges, scenario.value_lo, scenario.value_hi,
                       group_value_stream);
  truth.group_precision = precision_from_values(scenario.p, group_values);

  truth.individual_edges.reserve(static_cast<std::size_t>(scenario.k_subjects));
  truth.individual_precisions.reserve(static_cast<std::size_t>(scenario.k_subjects));
  truth.datasets.reserve(static_cast<std::size_t>(scenario.k_subjects));

  for (int k = 0; k < scenario.k_subjects; ++k) {
    EdgeSet edges_k = perturb_edges(truth.group_edges, scenario.rho_diff,
                                    subject_seed(scenario.seed, kStreamSubjectEdges, k));

    // Retained edges keep the group draw; added edges get fresh values.
    RngStream value_stream(subject_seed(scenario.seed, kStreamSubjectValues, k));
    EdgeValues values_k;
    for (const auto& e : edges_k.edges) {
      const auto it = group_values.find(e);
      values_k[e] = it != group_values.end()
                        ? it->second
                        : value_stream.signed_uniform(scenario.value_lo, scenario.value_hi);
    }
    Matrix prec_k = precision_from_values(scenario.p, values_k);

    const Matrix cov_k = inverse_pd(prec_k);
    Eigen::LLT<Matrix> llt(cov_k);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("scenario covariance not PD");
    const Matrix chol = llt.matrixL();

    RngStream data_stream(subject_seed(scenario.seed, kStreamSubjectData, k));
    Matrix observations(scenario.n, scenario.p);
    Vector z(scenario.p);
    for (int row = 0; row < scenario.n; ++row) {
      for (int col = 0; col < scenario.p; ++col) z[col] = data_stream.normal();
      observations.row(row) = (chol * z).transpose();
    }

    truth.individual_edges.push_back(std::move(edges_k));
    truth.individual_precisions.push_back(std::move(prec_k));
    truth.datasets.push_back(SubjectData::from_observations(std::move(observations)));
  }
  return truth;
}

}  // namespace bggm
