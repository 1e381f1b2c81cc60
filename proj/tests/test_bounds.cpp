#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "kclust/bounds.hpp"
#include "kclust/clustering.hpp"
#include "kclust/sampling.hpp"
#include "oracles.hpp"

using namespace kclust;

TEST_CASE("eigen_system invariants") {
  RandomSource rng(81);
  const FullKernel K = oracles::random_psd_kernel(30, 10, rng);
  const EigenSystem es = eigen_system(K);

  // Descending order.
  for (int i = 1; i < es.n(); ++i) CHECK(es.eigenvalues(i) <= es.eigenvalues(i - 1));
  // Orthonormal columns.
  const Eigen::MatrixXd gram = es.eigenvectors.transpose() * es.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff() <= 1e-8);
  // Eigenvalue equation against the raw values.
  const Eigen::MatrixXd resid =
      K.matrix * es.eigenvectors - es.eigenvectors * es.eigenvalues_raw.asDiagonal();
  CHECK(resid.cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, es.eigenvalues(0)));
  CHECK(es.eigenvalues.minCoeff() >= 0.0);

  SUBCASE("indefinite kernels get clipped with a flag") {
    FullKernel ind;
    ind.matrix.resize(2, 2);
    ind.matrix << 0.0, 1.0, 1.0, 0.0;  // eigenvalues +1, -1
    const EigenSystem e2 = eigen_system(ind);
    CHECK(e2.clipped_negative);
    CHECK(e2.eigenvalues(1) == 0.0);
    CHECK(e2.eigenvalues_raw(1) == doctest::Approx(-1.0));
  }
}

TEST_CASE("restricted_loss") {
  RandomSource rng(82);
  const FullKernel K = oracles::random_psd_kernel(12, 6, rng, 0.1);
  const Membership u = oracles::random_partition(12, 3, rng);

  SUBCASE("full mask equals the clustering objective") {
    const double a = restricted_loss(K, u, SampleMask::all_ones(12));
    const double b = clustering_objective(K, u);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }
  SUBCASE("single selected point, one cluster, hand formula") {
    const Membership one(1, std::vector<int>(12, 0));
    const int p = 5;
    const double got = restricted_loss(K, one, SampleMask::from_indices(12, {p}));
    const double colsum = K.matrix.col(p).sum();
    const double want = K.matrix.trace() - colsum * colsum / (12.0 * K.matrix(p, p));
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
  SUBCASE("restriction never reduces the error") {
    const double full = restricted_loss(K, u, SampleMask::all_ones(12));
    RandomSource mrng(83);
    for (int t = 0; t < 50; ++t) {
      const int m = 1 + static_cast<int>(mrng.uniform_below(12));
      const auto idx = uniform_sample(12, m, mrng);
      const double r = restricted_loss(K, u, SampleMask::from_indices(12, idx));
      CHECK(r >= full - 1e-9);
    }
  }
  SUBCASE("empty mask throws") {
    CHECK_THROWS_AS(restricted_loss(K, u, SampleMask::from_indices(12, {})), DataError);
  }
}

TEST_CASE("theorem1_bound closed forms on the identity kernel") {
  const int n = 10, C = 2;
  FullKernel K;
  K.matrix = Eigen::MatrixXd::Identity(n, n);
  Membership u(C, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1});

  for (int m : {2, 5, n}) {
    const double loss = clustering_objective(K, u);
    const double got = theorem1_bound(K, u, m);
    CHECK(got == doctest::Approx(loss + double(C) * n / double(n + m)).epsilon(1e-10));
  }
  // m = n reduces to loss + C/2.
  CHECK(theorem1_bound(K, u, n) ==
        doctest::Approx(clustering_objective(K, u) + C / 2.0).epsilon(1e-10));

  SUBCASE("nonpositive diagonal rejected") {
    K.matrix(3, 3) = 0.0;
    CHECK_THROWS_AS(theorem1_bound(K, u, 2), DataError);
  }
}

TEST_CASE("theorem1 bound dominates the Monte-Carlo mean") {
  RandomSource rng(84);
  const int n = 40, C = 3, masks = 500;
  const FullKernel K = oracles::random_psd_kernel(n, 8, rng, 0.2);
  const Membership u = oracles::random_partition(n, C, rng);

  for (int m : {4, 10, 20}) {
    const double bound = theorem1_bound(K, u, m);
    double mean = 0.0, var = 0.0;
    std::vector<double> losses(masks);
    RandomSource mrng(85, m);
    for (int t = 0; t < masks; ++t) {
      const auto idx = uniform_sample(n, m, mrng);
      losses[t] = restricted_loss(K, u, SampleMask::from_indices(n, idx));
      mean += losses[t];
    }
    mean /= masks;
    for (double l : losses) var += (l - mean) * (l - mean);
    const double se = std::sqrt(var / (masks - 1)) / std::sqrt(double(masks));
    CHECK(mean <= bound + 2.0 * se);
  }
}

TEST_CASE("corollary1_ratio_bound") {
  SUBCASE("flat a-spike spectrum, frozen arithmetic") {
    const int n = 800, a = 8, C = 2, m = 100;
    EigenSystem es;
    es.eigenvalues = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < a; ++i) es.eigenvalues(i) = double(n) / a;
    es.eigenvalues_raw = es.eigenvalues;
    es.eigenvectors = Eigen::MatrixXd::Identity(n, n);

    const RatioBound rb = corollary1_ratio_bound(es, C, m, n);
    CHECK(!rb.vacuous);
    // min of 1 + 2*(100/13.5)/600 and 1 + (C/m)/(3/4).
    CHECK(rb.value == doctest::Approx(1.0246913580246913).epsilon(1e-12));
    // Dominated by the closed-form gap rates.
    CHECK(rb.value <= 1.0 + double(C) * a / (m * double(a - C)));
    CHECK(rb.value <= 1.0 + 2.0 * C / m);
  }
  SUBCASE("non-increasing in m") {
    RandomSource rng(86);
    const FullKernel K = oracles::random_psd_kernel(30, 10, rng, 0.1);
    const EigenSystem es = eigen_system(K);
    double prev = std::numeric_limits<double>::infinity();
    for (int m : {2, 4, 8, 16, 30}) {
      const RatioBound rb = corollary1_ratio_bound(es, 3, m, 30);
      CHECK(rb.value <= prev + 1e-12);
      prev = rb.value;
    }
  }
  SUBCASE("vacuous when the top eigenvalues carry the whole trace") {
    EigenSystem es;
    es.eigenvalues = Eigen::VectorXd::Zero(5);
    es.eigenvalues(0) = 3.0;
    es.eigenvalues(1) = 2.0;
    es.eigenvalues_raw = es.eigenvalues;
    es.eigenvectors = Eigen::MatrixXd::Identity(5, 5);
    const RatioBound rb = corollary1_ratio_bound(es, 2, 2, 5);
    CHECK(rb.vacuous);
  }
}

TEST_CASE("coherence") {
  SUBCASE("uniform rank-1 kernel has minimal coherence") {
    const int n = 16;
    EigenSystem es;
    es.eigenvalues = Eigen::VectorXd::Zero(n);
    es.eigenvalues(0) = 1.0;
    es.eigenvalues_raw = es.eigenvalues;
    es.eigenvectors = Eigen::MatrixXd::Identity(n, n);
    es.eigenvectors.col(0) = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
    CHECK(coherence(es, 1).top_block == doctest::Approx(1.0));
  }
  SUBCASE("standard-basis top block is maximally localized") {
    const int n = 12, C = 3;
    EigenSystem es;
    es.eigenvalues = Eigen::VectorXd::Ones(n);
    es.eigenvalues_raw = es.eigenvalues;
    es.eigenvectors = Eigen::MatrixXd::Identity(n, n);
    CHECK(coherence(es, C).top_block == doctest::Approx(double(n) / C));
    CHECK(coherence(es, C).all_columns == doctest::Approx(double(n)));
  }
  SUBCASE("matches a brute-force row scan on a random orthonormal block") {
    RandomSource rng(87);
    const FullKernel K = oracles::random_psd_kernel(50, 20, rng);
    const EigenSystem es = eigen_system(K);
    const int C = 3;
    double mx = 0;
    for (int i = 0; i < 50; ++i) {
      double s = 0;
      for (int c = 0; c < C; ++c) s += es.eigenvectors(i, c) * es.eigenvectors(i, c);
      mx = std::max(mx, s);
    }
    CHECK(coherence(es, C).top_block == doctest::Approx(50.0 / C * mx).epsilon(1e-12));
  }
}

TEST_CASE("nystrom_error") {
  RandomSource rng(88);
  SUBCASE("m = n reconstructs exactly") {
    const FullKernel K = oracles::random_psd_kernel(20, 8, rng, 0.3);
    std::vector<int> all(20);
    std::iota(all.begin(), all.end(), 0);
    const auto est = nystrom_error(K, all, 0.0);
    CHECK(est.converged);
    const double l1 = eigen_system(K).eigenvalues(0);
    CHECK(est.value <= 1e-8 * l1);
  }
  SUBCASE("rank-2 kernel is reconstructed from 2 independent columns") {
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(12);
    lam(0) = 5.0;
    lam(1) = 2.0;
    const FullKernel K = oracles::kernel_with_spectrum(lam, rng);
    const auto est = nystrom_error(K, {0, 7}, 0.0);
    // Dense oracle for the residual norm.
    Eigen::MatrixXd KS(12, 2);
    KS.col(0) = K.matrix.col(0);
    KS.col(1) = K.matrix.col(7);
    Eigen::MatrixXd A(2, 2);
    A << K.matrix(0, 0), K.matrix(0, 7), K.matrix(7, 0), K.matrix(7, 7);
    const Eigen::MatrixXd R =
        K.matrix - KS * A.completeOrthogonalDecomposition().solve(KS.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(R);
    const double dense_norm = oracle.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(est.value == doctest::Approx(dense_norm).epsilon(1e-6));
    CHECK(est.value <= 1e-7 * 5.0);
  }
  SUBCASE("matches a dense eigensolver oracle and stays within [0, ||K||]") {
    for (int t = 0; t < 5; ++t) {
      const FullKernel K = oracles::random_psd_kernel(25, 10, rng, 0.1);
      RandomSource srng(89, t);
      const auto idx = uniform_sample(25, 6, srng);
      const auto est = nystrom_error(K, idx, 0.0);

      Eigen::MatrixXd KS(25, 6);
      for (int j = 0; j < 6; ++j) KS.col(j) = K.matrix.col(idx[j]);
      Eigen::MatrixXd A(6, 6);
      for (int i = 0; i < 6; ++i) A.row(i) = KS.row(idx[i]);
      const Eigen::MatrixXd R =
          K.matrix - KS * A.completeOrthogonalDecomposition().solve(KS.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(R);
      const double dense_norm = oracle.eigenvalues().cwiseAbs().maxCoeff();
      CHECK(est.value == doctest::Approx(dense_norm).epsilon(1e-6));

      const double knorm = eigen_system(K).eigenvalues(0);
      CHECK(est.value >= -1e-12);
      CHECK(est.value <= knorm * (1 + 1e-9));
    }
  }
}

TEST_CASE("theorem2_report") {
  RandomSource rng(90);
  SUBCASE("scaled identity kernel matches the hand formula") {
    const int n = 24, C = 2, m = 6;
    const double scale = 1.75, delta = 0.1;
    FullKernel K;
    K.matrix = scale * Eigen::MatrixXd::Identity(n, n);
    RandomSource r2(91);
    const BoundReport rep = theorem2_report(K, C, m, delta, 8, r2);

    CHECK(rep.lambda_c_plus_1 == doctest::Approx(scale));
    CHECK(rep.tau.top_block == doctest::Approx(double(n) / C));
    const double rhs = scale * (1.0 + 8.0 * (double(n) / C) * std::log(2.0 / delta) *
                                          std::sqrt(double(C) * n / double(m)));
    CHECK(rep.theoretical_rhs == doctest::Approx(rhs).epsilon(1e-12));
    // For the identity kernel the residual after sampling m coordinates has
    // spectral norm exactly `scale`.
    CHECK(rep.empirical_max == doctest::Approx(scale).epsilon(1e-6));
  }
  SUBCASE("m = n brings every trial to zero") {
    const FullKernel K = oracles::random_psd_kernel(18, 6, rng, 0.2);
    RandomSource r3(92);
    const BoundReport rep = theorem2_report(K, 2, 18, 0.1, 5, r3);
    CHECK(rep.empirical_max <= 1e-8 * eigen_system(K).eigenvalues(0));
  }
  SUBCASE("parallel trials match serial trials exactly") {
    const FullKernel K = oracles::random_psd_kernel(20, 6, rng, 0.2);
    RandomSource ra(93), rb(93);
    const BoundReport pa = theorem2_report(K, 2, 5, 0.1, 12, ra, 1, 1, 0, true);
    const BoundReport pb = theorem2_report(K, 2, 5, 0.1, 12, rb, 1, 1, 0, false);
    REQUIRE(pa.empirical_errors.size() == pb.empirical_errors.size());
    for (std::size_t i = 0; i < pa.empirical_errors.size(); ++i)
      CHECK(pa.empirical_errors[i] == pb.empirical_errors[i]);
  }
  SUBCASE("sample-size condition is reported, not enforced") {
    FullKernel K;
    K.matrix = Eigen::MatrixXd::Identity(10, 10);
    RandomSource r4(94);
    const BoundReport rep = theorem2_report(K, 2, 2, 0.1, 3, r4, 1.0, 1.0, 0.0);
    CHECK(rep.condition.p == 2.0);
    CHECK(rep.condition.required_m ==
          doctest::Approx(5.0 * 2.0 * std::max(std::log(2.0), std::log(30.0))));
    CHECK(!rep.condition.satisfied);  // m=2 is far below
  }
}
