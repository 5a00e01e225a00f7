#pragma once

#include <cstdint>
#include <vector>

#include "bggm/linalg.hpp"

namespace bggm {

/// Undirected graph on p nodes as a sorted list of pairs (j, jp) with j < jp.
struct EdgeSet {
  int p = 0;
  std::vector<std::pair<int, int>> edges;

  bool contains(int j, int jp) const;
  /// Sorts, deduplicates, normalizes orientation, and validates indices.
  void normalize();
};

enum class GraphModel { kScaleFree, kErdosRenyi, kExplicit };

struct SimScenario {
  int p = 100;
  int k_subjects = 8;
  int n = 50;
  double rho_diff = 0.0;  // fraction of group edges toggled per subject
  GraphModel graph_model = GraphModel::kScaleFree;
  double er_edge_prob = 0.02;  // Erdos-Renyi only
  EdgeSet explicit_edges;      // Explicit only
  double value_lo = 0.5;
  double value_hi = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimTruth {
  EdgeSet group_edges;
  Matrix group_precision;
  std::vector<EdgeSet> individual_edges;
  std::vector<Matrix> individual_precisions;
  std::vector<SubjectData> datasets;
};

/// Group-level graph. ScaleFree grows a tree by preferential attachment
/// (one edge per new node, attachment weight degree + 1), so p nodes give a
/// connected graph with p - 1 edges. ErdosRenyi includes each pair with
/// probability er_edge_prob. Deterministic given the scenario seed.
EdgeSet generate_group_graph(const SimScenario& scenario);

/// Precision matrix for an edge set: identity diagonal, edge values drawn
/// uniformly from [-hi,-lo] U [lo,hi], each off-diagonal divided by its row's
/// edge count, then symmetrized as (A + A^T)/2. If the smallest eigenvalue
/// falls below 0.05 the off-diagonal part is rescaled to restore that
/// margin (row normalization alone does not guarantee positive definiteness
/// once hubs are symmetrized). The zero pattern equals the edge set exactly.
Matrix generate_precision(const EdgeSet& edges, double value_lo, double value_hi,
                          std::uint64_t seed);

/// Toggles round(rho_diff * M) distinct pairs chosen uniformly from all
/// p(p-1)/2 pairs, where M is the edge count of the input: existing edges
/// are removed, absent ones added. Deterministic given seed.
EdgeSet perturb_edges(const EdgeSet& group, double rho_diff, std::uint64_t seed);

/// Full data-generating process: group graph and precision, per-subject
/// perturbed graphs and precisions (retained edges keep the group draw,
/// added edges get fresh draws, then the same row normalization), and n
/// Gaussian samples per subject from N(0, Omega_k^{-1}). Subject k uses
/// streams derived from (seed, k), so K can grow without reshuffling
/// earlier subjects.
SimTruth generate_scenario(const SimScenario& scenario);

}  // namespace bggm
