#pragma once

#include <vector>

#include "kclust/core.hpp"

namespace kclust {

/// Joint label counts between two partitions, with marginals.
struct ContingencyTable {
  int Ca = 0, Cb = 0;
  std::vector<long long> counts;     // Ca x Cb, row-major
  std::vector<long long> row_sums;   // length Ca
  std::vector<long long> col_sums;   // length Cb
  long long total = 0;

  static ContingencyTable from(const Membership& a, const Membership& b);

  long long at(int i, int j) const { return counts[std::size_t(i) * Cb + j]; }
};

/// Normalized mutual information, natural log, 0*log0 = 0. If either
/// partition has a single populated cluster the value is 0, except when both
/// do (the partitions are then identical) which gives 1.
double nmi(const Membership& a, const Membership& b);

/// Mean NMI of the consensus against each input partition.
double anmi(const Membership& consensus, const std::vector<Membership>& inputs);

/// Adjusted Rand index (Hubert-Arabie form). Degenerate pairs (zero
/// denominator) give 1 when the partitions match, else 0.
double ari(const Membership& a, const Membership& b);

/// (initial - final) / initial; requires initial > 0.
double error_reduction(double initial_error, double final_error);

}  // namespace kclust
