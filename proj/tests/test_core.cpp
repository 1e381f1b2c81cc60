#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kclust/core.hpp"
#include "kclust/rng.hpp"
#include "oracles.hpp"

using namespace kclust;

TEST_CASE("l1_normalize basic cases") {
  SUBCASE("two clusters") {
    Membership u(2, {0, 0, 1});
    const auto nm = l1_normalize(u);
    CHECK(nm.rows(0, 0) == doctest::Approx(0.5));
    CHECK(nm.rows(0, 1) == doctest::Approx(0.5));
    CHECK(nm.rows(0, 2) == 0.0);
    CHECK(nm.rows(1, 2) == 1.0);
    CHECK(!nm.has_empty());
  }
  SUBCASE("identity when every point is its own cluster") {
    Membership u(3, {0, 1, 2});
    const auto nm = l1_normalize(u);
    CHECK((nm.rows - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("empty cluster flagged, zero row") {
    Membership u(2, {0, 0, 0, 0});
    const auto nm = l1_normalize(u);
    for (int i = 0; i < 4; ++i) CHECK(nm.rows(0, i) == doctest::Approx(0.25));
    CHECK(nm.rows.row(1).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(nm.empty_clusters.size() == 1);
    CHECK(nm.empty_clusters[0] == 1);
  }
}

TEST_CASE("l2_normalize basic cases") {
  Membership u(2, {0, 0, 1});
  const auto nm = l2_normalize(u);
  CHECK(nm.rows(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(nm.rows(1, 2) == 1.0);

  Membership id(3, {0, 1, 2});
  CHECK((l2_normalize(id).rows - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("l2-normalized rows are orthonormal without empty clusters") {
  RandomSource rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng.uniform_below(40));
    const int C = 2 + static_cast<int>(rng.uniform_below(4));
    Membership u = oracles::random_partition(n, C, rng);
    // Force every cluster nonempty.
    for (int k = 0; k < C && k < n; ++k) u.assign[k] = k;

    const auto ut = l2_normalize(u);
    const Eigen::MatrixXd gram = ut.rows * ut.rows.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(C, C)).cwiseAbs().maxCoeff() <= 1e-12);

    // Uhat = diag(1/sqrt(n_k)) Ut elementwise.
    const auto uh = l1_normalize(u);
    const auto nk = u.counts();
    for (int k = 0; k < C; ++k)
      for (int i = 0; i < n; ++i)
        CHECK(uh.rows(k, i) ==
              doctest::Approx(ut.rows(k, i) / std::sqrt(double(nk[k]))).epsilon(1e-14));

    // Round trip through either support recovers the assignment.
    CHECK(membership_from_support(ut).assign == u.assign);
    CHECK(membership_from_support(uh).assign == u.assign);
  }
}

TEST_CASE("membership validation") {
  Membership bad(2, {0, 2});
  CHECK_THROWS_AS(bad.validate(), DataError);
  Membership ok(3, {0, 2, 1});
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.counts() == std::vector<int>{1, 1, 1});
}

TEST_CASE("same_partition is label-permutation invariant") {
  Membership a(2, {0, 0, 1, 1});
  Membership b(2, {1, 1, 0, 0});
  Membership c(2, {0, 1, 0, 1});
  CHECK(same_partition(a, b));
  CHECK(!same_partition(a, c));
}

TEST_CASE("RandomSource replays identically and separates streams") {
  RandomSource a(123, 5), b(123, 5), c(123, 6);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.u64(), vb = b.u64(), vc = c.u64();
    all_equal &= (va == vb);
    any_diff |= (va != vc);
  }
  CHECK(all_equal);
  CHECK(any_diff);

  RandomSource d(7);
  for (int i = 0; i < 1000; ++i) {
    const double r = d.real();
    CHECK(r >= 0.0);
    CHECK(r < 1.0);
    const auto k = d.uniform_below(17);
    CHECK(k < 17);
  }
}

TEST_CASE("DataMatrix validation") {
  DataMatrix X;
  X.values.resize(2, 2);
  X.values << 1, 2, 3, 4;
  CHECK_NOTHROW(X.validate());
  X.labels = std::vector<int>{1};
  CHECK_THROWS_AS(X.validate(), DataError);
  X.labels = std::vector<int>{1, 0};
  CHECK_NOTHROW(X.validate());
  X.values(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(X.validate(), DataError);
}
