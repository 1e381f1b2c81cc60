#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kclust/core.hpp"
#include "kclust/rng.hpp"

namespace kclust {

/// Complete weighted graph over the rC cluster indicator vectors of an
/// ensemble, edges weighted by Jaccard similarity.
struct MetaGraph {
  Eigen::MatrixXd vertices;  // rC x n, one indicator vector per row
  Eigen::MatrixXd weights;   // rC x rC, symmetric, entries in [0,1]
  int r = 0;
  int C = 0;

  int n_vertices() const { return static_cast<int>(vertices.rows()); }
};

/// C groups of meta-graph vertices and their mean indicator vectors.
struct MetaClusters {
  std::vector<std::vector<int>> groups;  // C groups, disjoint, covering
  Eigen::MatrixXd mu;                    // C x n mean vectors, entries in [0,1]
  bool degenerate_weights = false;
};

/// u.v / (|u|^2 + |v|^2 - u.v) for binary vectors; 0 when both are all-zero.
double jaccard(Eigen::Ref<const Eigen::VectorXd> u, Eigen::Ref<const Eigen::VectorXd> v);

MetaGraph build_meta_graph(const std::vector<Membership>& partitions,
                           bool parallel = true);

/// Balanced partition of the meta-graph: spectral embedding of the
/// normalized weight matrix into C-1 dimensions, then greedy capacity-bound
/// assignment in decreasing-similarity order. Deterministic given rng.
MetaClusters partition_meta_graph(const MetaGraph& graph, int C, RandomSource& rng);

struct ConsensusInfo {
  int populated_clusters = 0;
  bool zero_mu_cluster = false;
};

/// Point i joins argmax_k mu(k, i); ties broken by the seeded rng.
Membership consensus(const MetaClusters& mc, RandomSource& rng,
                     ConsensusInfo* info = nullptr);

/// The full pipeline over r partitions.
Membership mcla(const std::vector<Membership>& partitions, int C, RandomSource& rng,
                ConsensusInfo* info = nullptr);

}  // namespace kclust
