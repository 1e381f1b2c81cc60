#include "kclust/ensemble.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "kclust/parallel.hpp"

namespace kclust {

double jaccard(Eigen::Ref<const Eigen::VectorXd> u, Eigen::Ref<const Eigen::VectorXd> v) {
  if (u.size() != v.size()) throw DataError("jaccard: length mismatch");
  const double uv = u.dot(v);
  const double denom = u.squaredNorm() + v.squaredNorm() - uv;
  if (denom == 0.0) return 0.0;
  return uv / denom;
}

MetaGraph build_meta_graph(const std::vector<Membership>& partitions, bool parallel) {
  if (partitions.empty()) throw DataError("build_meta_graph: no partitions");
  const int n = partitions.front().n();
  const int C = partitions.front().C;
  for (const auto& p : partitions) {
    p.validate();
    if (p.n() != n || p.C != C)
      throw DataError("build_meta_graph: partitions disagree on n or C");
  }

  MetaGraph g;
  g.r = static_cast<int>(partitions.size());
  g.C = C;
  const int V = g.r * C;
  g.vertices = Eigen::MatrixXd::Zero(V, n);
  for (int q = 0; q < g.r; ++q)
    for (int i = 0; i < n; ++i) g.vertices(q * C + partitions[q].assign[i], i) = 1.0;

  g.weights.resize(V, V);
  for_each_chunk(V, parallel, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i)
      for (int j = i; j < V; ++j) {
        const double s = jaccard(g.vertices.row(i), g.vertices.row(j));
        g.weights(i, j) = s;
        g.weights(j, i) = s;
      }
  });
  return g;
}

MetaClusters partition_meta_graph(const MetaGraph& graph, int C, RandomSource& rng) {
  const int V = graph.n_vertices();
  if (V < C || C < 1) throw DataError("partition_meta_graph: need rC >= C >= 1");

  MetaClusters out;
  out.groups.assign(C, {});

  const Eigen::VectorXd degree = graph.weights.rowwise().sum();
  if (degree.maxCoeff() <= 1e-12) {
    // No structure at all: arbitrary balanced split.
    out.degenerate_weights = true;
    for (int v = 0; v < V; ++v) out.groups[v % C].push_back(v);
  } else if (C == 1) {
    for (int v = 0; v < V; ++v) out.groups[0].push_back(v);
  } else {
    // Normalized weights, with the known trivial direction D^(1/2) 1
    // deflated so degenerate spectra cannot hide a separating eigenvector.
    Eigen::VectorXd dinv_sqrt(V);
    for (int v = 0; v < V; ++v)
      dinv_sqrt(v) = degree(v) > 0 ? 1.0 / std::sqrt(degree(v)) : 0.0;
    Eigen::MatrixXd N =
        dinv_sqrt.asDiagonal() * graph.weights * dinv_sqrt.asDiagonal();
    Eigen::VectorXd q = degree.cwiseMax(0.0).cwiseSqrt();
    const double qn = q.norm();
    if (qn > 0) q /= qn;
    N.noalias() -= q * q.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N);
    if (es.info() != Eigen::Success)
      throw NumericalError("partition_meta_graph: eigendecomposition failed");
    const int dims = C - 1;
    Eigen::MatrixXd Y(V, dims);
    for (int c = 0; c < dims; ++c) Y.col(c) = es.eigenvectors().col(V - 1 - c);

    // Farthest-first seeds, one per group; first seed from the rng.
    std::vector<int> seed(C, -1);
    std::vector<char> seeded(V, 0);
    seed[0] = static_cast<int>(rng.uniform_below(std::uint64_t(V)));
    seeded[seed[0]] = 1;
    Eigen::VectorXd mindist =
        (Y.rowwise() - Y.row(seed[0])).rowwise().squaredNorm();
    for (int k = 1; k < C; ++k) {
      int best = -1;
      double bd = -1.0;
      for (int v = 0; v < V; ++v)
        if (!seeded[v] && mindist(v) > bd) {
          bd = mindist(v);
          best = v;
        }
      seed[k] = best;
      seeded[best] = 1;
      mindist = mindist.cwiseMin(
          (Y.rowwise() - Y.row(best)).rowwise().squaredNorm());
    }

    const int cap = (2 * V + C - 1) / C;  // factor-2 slack on rC/C
    std::vector<int> group_of(V, -1);
    Eigen::MatrixXd centroid(C, dims);
    std::vector<int> size(C, 0);
    for (int k = 0; k < C; ++k) {
      group_of[seed[k]] = k;
      centroid.row(k) = Y.row(seed[k]);
      size[k] = 1;
    }

    // Greedy: repeatedly place the unassigned vertex with the highest
    // similarity to some open group.
    int remaining = V - C;
    while (remaining > 0) {
      int bv = -1, bg = -1;
      double bs = -std::numeric_limits<double>::infinity();
      for (int v = 0; v < V; ++v) {
        if (group_of[v] >= 0) continue;
        for (int k = 0; k < C; ++k) {
          if (size[k] >= cap) continue;
          const double s = -(Y.row(v) - centroid.row(k)).squaredNorm();
          if (s > bs) {
            bs = s;
            bv = v;
            bg = k;
          }
        }
      }
      group_of[bv] = bg;
      centroid.row(bg) =
          (centroid.row(bg) * double(size[bg]) + Y.row(bv)) / double(size[bg] + 1);
      ++size[bg];
      --remaining;
    }
    for (int v = 0; v < V; ++v) out.groups[group_of[v]].push_back(v);
  }

  const int n = static_cast<int>(graph.vertices.cols());
  out.mu = Eigen::MatrixXd::Zero(C, n);
  for (int k = 0; k < C; ++k) {
    for (int v : out.groups[k]) out.mu.row(k) += graph.vertices.row(v);
    if (!out.groups[k].empty()) out.mu.row(k) /= double(out.groups[k].size());
  }
  return out;
}

Membership consensus(const MetaClusters& mc, RandomSource& rng, ConsensusInfo* info) {
  const int C = static_cast<int>(mc.mu.rows());
  const int n = static_cast<int>(mc.mu.cols());

  std::vector<char> zero_mu(C, 1);
  for (int k = 0; k < C; ++k)
    if (mc.mu.row(k).maxCoeff() > 0) zero_mu[k] = 0;

  Membership u;
  u.C = C;
  u.assign.resize(n);
  std::vector<int> ties;
  for (int i = 0; i < n; ++i) {
    double best = mc.mu.col(i).maxCoeff();
    ties.clear();
    for (int k = 0; k < C; ++k) {
      if (mc.mu(k, i) != best) continue;
      // An all-zero meta-cluster never wins a point outright.
      if (best == 0.0 && zero_mu[k]) continue;
      ties.push_back(k);
    }
    if (ties.empty())
      for (int k = 0; k < C; ++k)
        if (mc.mu(k, i) == best) ties.push_back(k);
    u.assign[i] = ties.size() == 1
                      ? ties[0]
                      : ties[static_cast<int>(rng.uniform_below(ties.size()))];
  }

  if (info) {
    const auto nk = u.counts();
    info->populated_clusters = 0;
    for (int c : nk)
      if (c > 0) ++info->populated_clusters;
    info->zero_mu_cluster = std::any_of(zero_mu.begin(), zero_mu.end(),
                                        [](char z) { return z != 0; });
  }
  return u;
}

Membership mcla(const std::vector<Membership>& partitions, int C, RandomSource& rng,
                ConsensusInfo* info) {
  const MetaGraph g = build_meta_graph(partitions);
  if (g.C != C) throw DataError("mcla: partitions have a different C");
  const MetaClusters mc = partition_meta_graph(g, C, rng);
  return consensus(mc, rng, info);
}

}  // namespace kclust
