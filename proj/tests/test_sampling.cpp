#include <doctest.h>

#include <algorithm>
#include <set>

#include "kclust/sampling.hpp"
#include "oracles.hpp"

using namespace kclust;

namespace {

bool distinct_in_range(const std::vector<int>& idx, int n) {
  std::set<int> s(idx.begin(), idx.end());
  if (s.size() != idx.size()) return false;
  return *s.begin() >= 0 && *s.rbegin() < n;
}

}  // namespace

TEST_CASE("uniform_sample contracts") {
  RandomSource rng(1);
  SUBCASE("m = n is exhaustive") {
    auto idx = uniform_sample(5, 5, rng);
    CHECK(idx == std::vector<int>{0, 1, 2, 3, 4});
  }
  SUBCASE("deterministic replay") {
    RandomSource a(99, 3), b(99, 3);
    CHECK(uniform_sample(10, 3, a) == uniform_sample(10, 3, b));
  }
  SUBCASE("m > n throws") { CHECK_THROWS_AS(uniform_sample(4, 5, rng), DataError); }
  SUBCASE("distinct and in range") {
    for (int t = 0; t < 50; ++t) {
      auto idx = uniform_sample(37, 11, rng);
      CHECK(distinct_in_range(idx, 37));
      CHECK(idx.size() == 11);
    }
  }
}

TEST_CASE("uniform_sample frequencies within 3 sigma") {
  // 40000 draws of a single index out of 5: binomial(40000, 0.2).
  const int draws = 40000, n = 5;
  std::vector<int> freq(n, 0);
  RandomSource rng(2024);
  for (int t = 0; t < draws; ++t) ++freq[uniform_sample(n, 1, rng)[0]];
  const double expected = draws / double(n);
  const double sigma = std::sqrt(draws * 0.2 * 0.8);
  for (int i = 0; i < n; ++i) CHECK(std::abs(freq[i] - expected) <= 3.0 * sigma);
}

TEST_CASE("per-index inclusion probability is m/n within 3 sigma") {
  const int n = 12, m = 4, draws = 20000;
  std::vector<int> freq(n, 0);
  RandomSource rng(77);
  for (int t = 0; t < draws; ++t)
    for (int i : uniform_sample(n, m, rng)) ++freq[i];
  const double p = double(m) / n;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (int i = 0; i < n; ++i) CHECK(std::abs(freq[i] - draws * p) <= 3.0 * sigma);
}

TEST_CASE("diagonal_sample") {
  FullKernel K;
  SUBCASE("sort order forced") {
    K.matrix = Eigen::Vector3d(3, 1, 2).asDiagonal();
    CHECK(diagonal_sample(K, 2) == std::vector<int>{0, 2});
  }
  SUBCASE("constant diagonal takes lowest indices") {
    K.matrix = Eigen::MatrixXd::Identity(6, 6);
    CHECK(diagonal_sample(K, 3) == std::vector<int>{0, 1, 2});
  }
  SUBCASE("m = n returns everything") {
    RandomSource rng(5);
    K = oracles::random_psd_kernel(7, 3, rng);
    CHECK(diagonal_sample(K, 7) == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  }
}

TEST_CASE("column_norm_sample") {
  FullKernel K;
  SUBCASE("diagonal scores") {
    K.matrix = Eigen::Vector3d(3, 1, 2).asDiagonal();
    CHECK(column_norm_sample(K, 1) == std::vector<int>{0});
  }
  SUBCASE("identity ties to lowest indices") {
    K.matrix = Eigen::MatrixXd::Identity(5, 5);
    CHECK(column_norm_sample(K, 2) == std::vector<int>{0, 1});
  }
  SUBCASE("matches a brute-force norm sort") {
    RandomSource rng(6);
    K = oracles::random_psd_kernel(7, 4, rng);
    const auto got = column_norm_sample(K, 3);
    // Independent recomputation of the column norms.
    std::vector<std::pair<double, int>> scored;
    for (int j = 0; j < 7; ++j) {
      double s = 0;
      for (int i = 0; i < 7; ++i) s += K.matrix(i, j) * K.matrix(i, j);
      scored.push_back({-std::sqrt(s), j});
    }
    std::sort(scored.begin(), scored.end());
    std::vector<int> want = {scored[0].second, scored[1].second, scored[2].second};
    std::sort(want.begin(), want.end());
    CHECK(got == want);
  }
}

TEST_CASE("kmeans_sample") {
  SUBCASE("well-separated singletons are picked exactly") {
    DataMatrix X;
    X.values.resize(4, 1);
    X.values << 0.0, 100.0, 200.0, 300.0;
    RandomSource rng(9);
    auto idx = kmeans_sample(X, 4, rng);
    CHECK(idx == std::vector<int>{0, 1, 2, 3});
  }
  SUBCASE("m = n returns all indices") {
    RandomSource rng(10);
    const DataMatrix X = oracles::random_points(6, 2, rng);
    auto idx = kmeans_sample(X, 6, rng);
    CHECK(idx == std::vector<int>{0, 1, 2, 3, 4, 5});
  }
  SUBCASE("two far blobs yield one index per blob") {
    DataMatrix X;
    X.values.resize(8, 1);
    X.values << 0.0, 0.1, 0.2, 0.3, 1000.0, 1000.1, 1000.2, 1000.3;
    RandomSource rng(11);
    const auto idx = kmeans_sample(X, 2, rng);
    REQUIRE(idx.size() == 2);
    const bool one_low = (idx[0] < 4);
    const bool one_high = (idx[1] >= 4);
    CHECK(one_low);
    CHECK(one_high);
  }
  SUBCASE("distinct indices even with duplicate points") {
    DataMatrix X;
    X.values = Eigen::MatrixXd::Zero(5, 2);  // all identical
    RandomSource rng(12);
    const auto idx = kmeans_sample(X, 3, rng);
    CHECK(distinct_in_range(idx, 5));
    CHECK(idx.size() == 3);
  }
}
