#include "kclust/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "kclust/clustering.hpp"
#include "kclust/sampling.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kclust {

EigenSystem eigen_system(const FullKernel& K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K.matrix);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigen_system: eigendecomposition failed");
  const int n = K.n();
  EigenSystem out;
  out.eigenvalues_raw.resize(n);
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.eigenvalues_raw(i) = es.eigenvalues()(n - 1 - i);
    out.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  out.clipped_negative = out.eigenvalues_raw.minCoeff() < 0;
  out.eigenvalues = out.eigenvalues_raw.cwiseMax(0.0);
  return out;
}

int SampleMask::m() const {
  int c = 0;
  for (auto b : xi) c += (b != 0);
  return c;
}

std::vector<int> SampleMask::indices() const {
  std::vector<int> idx;
  for (int i = 0; i < n(); ++i)
    if (xi[i]) idx.push_back(i);
  return idx;
}

SampleMask SampleMask::all_ones(int n) {
  SampleMask s;
  s.xi.assign(n, 1);
  return s;
}

SampleMask SampleMask::from_indices(int n, const std::vector<int>& idx) {
  SampleMask s;
  s.xi.assign(n, 0);
  for (int i : idx) {
    if (i < 0 || i >= n) throw DataError("SampleMask: index out of range");
    s.xi[i] = 1;
  }
  return s;
}

namespace {

/// Solves A X = B for symmetric A, falling back to a pseudo-inverse solve
/// when the factorization is unreliable. For PSD kernels the right-hand
/// sides always lie in range(A), so the fallback is exact.
Eigen::MatrixXd sym_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() == Eigen::Success) {
    Eigen::MatrixXd X = ldlt.solve(B);
    const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
    if (X.allFinite() && (A * X - B).cwiseAbs().maxCoeff() <= 1e-6 * scale) return X;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  return cod.solve(B);
}

}  // namespace

double restricted_loss(const FullKernel& K, const Membership& U, const SampleMask& xi,
                       double ridge) {
  U.validate();
  const int n = K.n();
  if (U.n() != n || xi.n() != n) throw DataError("restricted_loss: size mismatch");
  const auto idx = xi.indices();
  const int ms = static_cast<int>(idx.size());
  if (ms < 1) throw DataError("restricted_loss: mask selects no points");

  Eigen::MatrixXd KS(n, ms);
  for (int j = 0; j < ms; ++j) KS.col(j) = K.matrix.col(idx[j]);
  Eigen::MatrixXd KSS(ms, ms);
  for (int i = 0; i < ms; ++i) KSS.row(i) = KS.row(idx[i]);
  if (ridge > 0) KSS.diagonal().array() += ridge * KSS.trace() / double(ms);

  const auto nk = U.counts();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(U.C, ms);  // rows uhat_k' K_S
  for (int i = 0; i < n; ++i) G.row(U.assign[i]) += KS.row(i);
  for (int k = 0; k < U.C; ++k)
    if (nk[k] > 0) G.row(k) /= double(nk[k]);

  const Eigen::MatrixXd beta = sym_solve(KSS, G.transpose());  // ms x C
  double loss = K.matrix.trace();
  for (int k = 0; k < U.C; ++k)
    if (nk[k] > 0) loss -= double(nk[k]) * G.row(k).dot(beta.col(k));
  if (!std::isfinite(loss))
    throw NumericalError("restricted_loss: singular selected sub-kernel");
  return loss;
}

double theorem1_bound(const FullKernel& K, const Membership& U, int m) {
  U.validate();
  const int n = K.n();
  if (U.n() != n) throw DataError("theorem1_bound: size mismatch");
  if (m < 1 || m > n) throw DataError("theorem1_bound: need 1 <= m <= n");
  const Eigen::VectorXd d = K.matrix.diagonal();
  if (d.minCoeff() <= 0)
    throw DataError("theorem1_bound: nonpositive kernel diagonal entry");

  Eigen::MatrixXd B = K.matrix;
  B.diagonal() += (double(n) / double(m)) * d;
  const Eigen::MatrixXd M = K.matrix - K.matrix * sym_solve(B, K.matrix);

  const NormalizedMembership ut = l2_normalize(U);
  return clustering_objective(K, U) + (ut.rows * M * ut.rows.transpose()).trace();
}

RatioBound corollary1_ratio_bound(const EigenSystem& eigs, int C, int m, int n) {
  if (C < 1 || C > eigs.n()) throw DataError("corollary1_ratio_bound: bad C");
  const auto& lam = eigs.eigenvalues;
  const double trK = lam.sum();
  double top = 0.0, num1 = 0.0;
  for (int i = 0; i < C; ++i) {
    top += lam(i);
    num1 += lam(i) / (1.0 + lam(i) * double(m) / double(n));
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double b1 = (trK - top) > 0 ? 1.0 + num1 / (trK - top) : inf;
  const double tail = (trK - top) / double(n);
  const double b2 = tail > 0 ? 1.0 + (double(C) / double(m)) / tail : inf;
  RatioBound out;
  out.value = std::min(b1, b2);
  out.vacuous = !std::isfinite(out.value);
  return out;
}

Coherence coherence(const EigenSystem& eigs, int C) {
  const int n = eigs.n();
  if (C < 1 || C > n) throw DataError("coherence: bad C");
  Coherence out;
  double top = 0.0, all = 0.0;
  for (int i = 0; i < n; ++i) {
    top = std::max(top, eigs.eigenvectors.row(i).head(C).squaredNorm());
    all = std::max(all, eigs.eigenvectors.row(i).squaredNorm());
  }
  out.top_block = double(n) / double(C) * top;
  out.all_columns = double(n) * all;
  return out;
}

SpectralNormEstimate nystrom_error(const FullKernel& K,
                                   const std::vector<int>& sample_indices, double ridge) {
  const int n = K.n();
  const int ms = static_cast<int>(sample_indices.size());
  if (ms < 1 || ms > n) throw DataError("nystrom_error: need 1 <= m <= n");
  for (int i : sample_indices)
    if (i < 0 || i >= n) throw DataError("nystrom_error: index out of range");

  Eigen::MatrixXd KS(n, ms);
  for (int j = 0; j < ms; ++j) KS.col(j) = K.matrix.col(sample_indices[j]);
  Eigen::MatrixXd A(ms, ms);
  for (int i = 0; i < ms; ++i) A.row(i) = KS.row(sample_indices[i]);
  if (ridge > 0) A.diagonal().array() += ridge * A.trace() / double(ms);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  bool use_cod = ldlt.info() != Eigen::Success;
  if (!use_cod) {
    // Sanity-probe the factorization once.
    const Eigen::VectorXd probe = KS.transpose() * Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd sol = ldlt.solve(probe);
    const double scale = std::max(1.0, probe.cwiseAbs().maxCoeff());
    use_cod = !sol.allFinite() || (A * sol - probe).cwiseAbs().maxCoeff() > 1e-6 * scale;
  }
  if (use_cod) cod.compute(A);

  const auto apply_residual = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const Eigen::VectorXd w = KS.transpose() * v;
    const Eigen::VectorXd s = use_cod ? cod.solve(w).eval() : ldlt.solve(w).eval();
    return K.matrix * v - KS * s;
  };

  // Deterministic, slightly uneven start vector.
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = 1.0 + 1e-3 * double((i * 2654435761u) % 101) / 101.0;
  v.normalize();

  const double kscale = std::max(K.matrix.cwiseAbs().maxCoeff(), 1e-300);
  SpectralNormEstimate out;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= 10000; ++it) {
    Eigen::VectorXd w = apply_residual(v);
    const double wn = w.norm();
    out.iterations = it;
    if (wn <= 1e-14 * kscale) {
      // Residual is numerically zero in this direction; the norm estimate
      // is bounded by wn itself.
      out.value = wn;
      out.converged = true;
      return out;
    }
    w /= wn;
    const double est = std::abs(w.dot(apply_residual(w)));
    out.value = est;
    if (std::abs(est - prev) <= 1e-8 * std::max(est, 1e-300)) {
      out.converged = true;
      return out;
    }
    prev = est;
    v = w;
  }
  return out;  // best estimate, converged == false
}

BoundReport theorem2_report(const FullKernel& K, int C, int m, double delta, int trials,
                            RandomSource& rng, double c1, double c2, double p,
                            bool parallel) {
  if (!(delta > 0 && delta < 1)) throw DataError("theorem2_report: delta must be in (0,1)");
  if (trials < 1) throw DataError("theorem2_report: trials must be >= 1");
  const int n = K.n();
  if (m < 1 || m > n) throw DataError("theorem2_report: need 1 <= m <= n");

  const EigenSystem eigs = eigen_system(K);

  BoundReport rep;
  rep.n = n;
  rep.C = C;
  rep.m = m;
  rep.trials = trials;
  rep.delta = delta;
  rep.tau = coherence(eigs, C);
  rep.clipped_negative_eigenvalues = eigs.clipped_negative;
  rep.lambda_c_plus_1 = C < n ? eigs.eigenvalues(C) : 0.0;
  rep.theoretical_rhs =
      rep.lambda_c_plus_1 *
      (1.0 + 8.0 * rep.tau.top_block * std::log(2.0 / delta) *
                 std::sqrt(double(C) * double(n) / double(m)));

  rep.condition.c1 = c1;
  rep.condition.c2 = c2;
  rep.condition.p = p > 0 ? p : double(C);
  rep.condition.required_m =
      rep.tau.top_block * double(C) *
      std::max(c1 * std::log(rep.condition.p), c2 * std::log(3.0 / delta));
  rep.condition.satisfied = double(m) >= rep.condition.required_m;

  rep.empirical_errors.assign(trials, 0.0);
  std::vector<char> failed(trials, 0);
  (void)parallel;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
  for (int t = 0; t < trials; ++t) {
    RandomSource trial_rng = rng.derive(std::uint64_t(t));
    const auto idx = uniform_sample(n, m, trial_rng);
    const SpectralNormEstimate est = nystrom_error(K, idx, 0.0);
    rep.empirical_errors[t] = est.value;
    failed[t] = est.converged ? 0 : 1;
  }
  rep.power_iteration_failure =
      std::any_of(failed.begin(), failed.end(), [](char f) { return f != 0; });

  std::vector<double> sorted = rep.empirical_errors;
  std::sort(sorted.begin(), sorted.end());
  rep.empirical_min = sorted.front();
  rep.empirical_max = sorted.back();
  rep.empirical_median = trials % 2 == 1
                             ? sorted[trials / 2]
                             : 0.5 * (sorted[trials / 2 - 1] + sorted[trials / 2]);
  return rep;
}

}  // namespace kclust
