#include "kclust/core.hpp"

#include <cmath>
#include <unordered_map>

namespace kclust {

void DataMatrix::validate() const {
  if (values.rows() < 1 || values.cols() < 1)
    throw DataError("DataMatrix: need n >= 1 and d >= 1");
  if (!values.allFinite()) throw DataError("DataMatrix: non-finite entry");
  if (labels && static_cast<int>(labels->size()) != n())
    throw DataError("DataMatrix: label count does not match point count");
}

void Membership::validate() const {
  if (C < 1) throw DataError("Membership: C must be >= 1");
  for (int a : assign)
    if (a < 0 || a >= C) throw DataError("Membership: cluster id out of range");
}

std::vector<int> Membership::counts() const {
  std::vector<int> nk(C, 0);
  for (int a : assign) ++nk[a];
  return nk;
}

namespace {

NormalizedMembership normalize(const Membership& u, NormMode mode) {
  u.validate();
  const int n = u.n();
  const auto nk = u.counts();

  NormalizedMembership out;
  out.mode = mode;
  out.rows = Eigen::MatrixXd::Zero(u.C, n);
  std::vector<double> scale(u.C, 0.0);
  for (int k = 0; k < u.C; ++k) {
    if (nk[k] == 0) {
      out.empty_clusters.push_back(k);
    } else {
      scale[k] = mode == NormMode::l1 ? 1.0 / nk[k] : 1.0 / std::sqrt(double(nk[k]));
    }
  }
  for (int i = 0; i < n; ++i) out.rows(u.assign[i], i) = scale[u.assign[i]];
  return out;
}

}  // namespace

NormalizedMembership l1_normalize(const Membership& u) { return normalize(u, NormMode::l1); }
NormalizedMembership l2_normalize(const Membership& u) { return normalize(u, NormMode::l2); }

Membership membership_from_support(const NormalizedMembership& nm) {
  const int C = static_cast<int>(nm.rows.rows());
  const int n = static_cast<int>(nm.rows.cols());
  Membership u;
  u.C = C;
  u.assign.resize(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < C; ++k) {
      if (nm.rows(k, i) != 0.0) {
        u.assign[i] = k;
        break;
      }
    }
    if (u.assign[i] < 0)
      throw DataError("membership_from_support: point with empty column");
  }
  return u;
}

bool same_partition(const Membership& a, const Membership& b) {
  if (a.n() != b.n()) return false;
  // First-occurrence canonical relabeling on both sides.
  std::unordered_map<int, int> ma, mb;
  for (int i = 0; i < a.n(); ++i) {
    const int ca = ma.emplace(a.assign[i], static_cast<int>(ma.size())).first->second;
    const int cb = mb.emplace(b.assign[i], static_cast<int>(mb.size())).first->second;
    if (ca != cb) return false;
  }
  return true;
}

}  // namespace kclust
