#pragma once

#include <string>
#include <vector>

#include "kclust/core.hpp"
#include "kclust/kernels.hpp"
#include "kclust/rng.hpp"

namespace kclust {

enum class SamplingStrategy { uniform, diagonal, column_norm, kmeans };

SamplingStrategy sampling_strategy_from_name(const std::string& name);
std::string sampling_strategy_name(SamplingStrategy s);

struct SamplePlan {
  SamplingStrategy strategy = SamplingStrategy::uniform;
  int m = 0;
  std::uint64_t seed = 0;
};

/// m distinct indices, uniform over all size-m subsets. Sorted ascending.
std::vector<int> uniform_sample(int n, int m, RandomSource& rng);

/// Indices of the m largest diagonal entries; ties go to the lower index.
/// Requires the full kernel.
std::vector<int> diagonal_sample(const FullKernel& K, int m);

/// Same selection rule with per-column Euclidean norms as scores.
std::vector<int> column_norm_sample(const FullKernel& K, int m);

/// Euclidean k-means with m centers; returns, per center, the index of the
/// nearest data point (duplicates fall through to the next-nearest).
std::vector<int> kmeans_sample(const DataMatrix& X, int m, RandomSource& rng);

}  // namespace kclust
