#include "kclust/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "kclust/clustering.hpp"

namespace kclust {

SamplingStrategy sampling_strategy_from_name(const std::string& name) {
  if (name == "uniform") return SamplingStrategy::uniform;
  if (name == "diagonal") return SamplingStrategy::diagonal;
  if (name == "column_norm") return SamplingStrategy::column_norm;
  if (name == "kmeans") return SamplingStrategy::kmeans;
  throw DataError("unknown sampling strategy: " + name);
}

std::string sampling_strategy_name(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::uniform: return "uniform";
    case SamplingStrategy::diagonal: return "diagonal";
    case SamplingStrategy::column_norm: return "column_norm";
    case SamplingStrategy::kmeans: return "kmeans";
  }
  return "?";
}

std::vector<int> uniform_sample(int n, int m, RandomSource& rng) {
  if (m < 1 || m > n) throw DataError("uniform_sample: need 1 <= m <= n");
  // Partial Fisher-Yates over an index pool.
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int j = 0; j < m; ++j) {
    const int pick = j + static_cast<int>(rng.uniform_below(std::uint64_t(n - j)));
    std::swap(pool[j], pool[pick]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

namespace {

/// Indices of the m largest scores; ties broken by the lower index.
std::vector<int> top_m_by_score(const Eigen::VectorXd& scores, int m) {
  const int n = static_cast<int>(scores.size());
  if (m < 1 || m > n) throw DataError("sampling: need 1 <= m <= n");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });
  order.resize(m);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

std::vector<int> diagonal_sample(const FullKernel& K, int m) {
  return top_m_by_score(K.matrix.diagonal(), m);
}

std::vector<int> column_norm_sample(const FullKernel& K, int m) {
  return top_m_by_score(K.matrix.colwise().norm(), m);
}

std::vector<int> kmeans_sample(const DataMatrix& X, int m, RandomSource& rng) {
  const int n = X.n();
  if (m < 1 || m > n) throw DataError("kmeans_sample: need 1 <= m <= n");
  if (m == n) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }

  SolverConfig cfg;
  cfg.maxiter = 10;
  cfg.seed = rng.u64();
  const ClusterResult km = kmeans(X, m, cfg);

  // Centers from the final assignment, then per center the nearest unused
  // point (duplicates fall through to the next-nearest).
  const auto nk = km.membership.counts();
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(m, X.d());
  for (int i = 0; i < n; ++i) centers.row(km.membership.assign[i]) += X.values.row(i);
  for (int k = 0; k < m; ++k)
    if (nk[k] > 0) centers.row(k) /= double(nk[k]);

  std::vector<char> used(n, 0);
  std::vector<int> out;
  out.reserve(m);
  for (int k = 0; k < m; ++k) {
    int best = -1;
    double bd = 0.0;
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double d = (X.values.row(i) - centers.row(k)).squaredNorm();
      if (best < 0 || d < bd) {
        bd = d;
        best = i;
      }
    }
    used[best] = 1;
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace kclust
