#include "kclust/metrics.hpp"

#include <cmath>

namespace kclust {

ContingencyTable ContingencyTable::from(const Membership& a, const Membership& b) {
  a.validate();
  b.validate();
  if (a.n() != b.n()) throw DataError("contingency: partitions differ in length");
  ContingencyTable t;
  t.Ca = a.C;
  t.Cb = b.C;
  t.counts.assign(std::size_t(a.C) * b.C, 0);
  t.row_sums.assign(a.C, 0);
  t.col_sums.assign(b.C, 0);
  t.total = a.n();
  for (int i = 0; i < a.n(); ++i) {
    ++t.counts[std::size_t(a.assign[i]) * b.C + b.assign[i]];
    ++t.row_sums[a.assign[i]];
    ++t.col_sums[b.assign[i]];
  }
  return t;
}

namespace {

int populated(const std::vector<long long>& sums) {
  int c = 0;
  for (long long s : sums)
    if (s > 0) ++c;
  return c;
}

double comb2(long long x) { return x < 2 ? 0.0 : 0.5 * double(x) * double(x - 1); }

}  // namespace

double nmi(const Membership& a, const Membership& b) {
  const ContingencyTable t = ContingencyTable::from(a, b);
  const double n = double(t.total);

  const int pa = populated(t.row_sums);
  const int pb = populated(t.col_sums);
  if (pa <= 1 || pb <= 1) return (pa <= 1 && pb <= 1) ? 1.0 : 0.0;

  double num = 0.0;
  for (int i = 0; i < t.Ca; ++i)
    for (int j = 0; j < t.Cb; ++j) {
      const long long nij = t.at(i, j);
      if (nij > 0)
        num += double(nij) *
               std::log(n * double(nij) / (double(t.row_sums[i]) * double(t.col_sums[j])));
    }

  // Entropies written through the same expression as the diagonal mutual-
  // information terms, so identical partitions give num == ha == hb bit for
  // bit and the ratio is exactly 1.
  double ha = 0.0, hb = 0.0;
  for (long long s : t.row_sums)
    if (s > 0) ha += double(s) * std::log(n * double(s) / (double(s) * double(s)));
  for (long long s : t.col_sums)
    if (s > 0) hb += double(s) * std::log(n * double(s) / (double(s) * double(s)));

  const double denom = ha == hb ? ha : std::sqrt(ha * hb);
  return num / denom;
}

double anmi(const Membership& consensus, const std::vector<Membership>& inputs) {
  if (inputs.empty()) throw DataError("anmi: empty input list");
  double sum = 0.0;
  for (const auto& u : inputs) sum += nmi(consensus, u);
  return sum / double(inputs.size());
}

double ari(const Membership& a, const Membership& b) {
  const ContingencyTable t = ContingencyTable::from(a, b);

  double sum_ij = 0.0;
  for (long long c : t.counts) sum_ij += comb2(c);
  double sum_a = 0.0, sum_b = 0.0;
  for (long long s : t.row_sums) sum_a += comb2(s);
  for (long long s : t.col_sums) sum_b += comb2(s);
  const double pairs = comb2(t.total);

  if (pairs == 0.0) return same_partition(a, b) ? 1.0 : 0.0;
  const double expected = sum_a * sum_b / pairs;
  const double denom = 0.5 * (sum_a + sum_b) - expected;
  if (denom == 0.0) return same_partition(a, b) ? 1.0 : 0.0;
  return (sum_ij - expected) / denom;
}

double error_reduction(double initial_error, double final_error) {
  if (!(initial_error > 0)) throw DataError("error_reduction: initial error must be > 0");
  return (initial_error - final_error) / initial_error;
}

}  // namespace kclust
