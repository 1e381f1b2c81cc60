#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kclust {

/// Malformed input, bad files, broken contracts on data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure (singular system, non-convergence).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// n points in d dimensions, one row per point. Ground-truth class labels
/// are optional and only used for scoring.
struct DataMatrix {
  Eigen::MatrixXd values;
  std::optional<std::vector<int>> labels;

  int n() const { return static_cast<int>(values.rows()); }
  int d() const { return static_cast<int>(values.cols()); }

  void validate() const;
};

/// Hard partition: assign[i] is the cluster id of point i, in [0, C).
struct Membership {
  int C = 0;
  std::vector<int> assign;

  Membership() = default;
  Membership(int clusters, std::vector<int> a) : C(clusters), assign(std::move(a)) {}

  int n() const { return static_cast<int>(assign.size()); }

  void validate() const;

  /// Points per cluster, length C.
  std::vector<int> counts() const;

  bool operator==(const Membership& other) const {
    return C == other.C && assign == other.assign;
  }
};

enum class NormMode { l1, l2 };

/// Row-normalized view of the one-hot membership matrix (C x n). Empty
/// clusters keep an all-zero row and are flagged rather than dividing by
/// zero; the caller decides the repair policy.
struct NormalizedMembership {
  Eigen::MatrixXd rows;
  NormMode mode = NormMode::l1;
  std::vector<int> empty_clusters;

  bool has_empty() const { return !empty_clusters.empty(); }
};

NormalizedMembership l1_normalize(const Membership& u);
NormalizedMembership l2_normalize(const Membership& u);

/// Recovers the hard assignment from the support of a normalized view.
Membership membership_from_support(const NormalizedMembership& nm);

/// True when the two label vectors induce the same partition of the points
/// (identical up to a relabeling of cluster ids).
bool same_partition(const Membership& a, const Membership& b);

}  // namespace kclust
