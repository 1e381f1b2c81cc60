#include "kclust/clustering.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "kclust/parallel.hpp"
#include "kclust/sampling.hpp"

namespace kclust {

void SolverConfig::validate() const {
  if (maxiter < 1) throw DataError("SolverConfig: maxiter must be >= 1");
  if (!(gd_epsilon > 0 && gd_epsilon < 1))
    throw DataError("SolverConfig: gd_epsilon must be in (0,1)");
  if (ridge < 0) throw DataError("SolverConfig: ridge must be >= 0");
}

namespace detail {

void sweep_scores(const Eigen::MatrixXd& KB, const Eigen::MatrixXd& Khat,
                  const Eigen::MatrixXd& alpha, bool parallel, Eigen::MatrixXd& P,
                  Eigen::VectorXd& q) {
  const int n = static_cast<int>(KB.rows());
  const int C = static_cast<int>(alpha.rows());
  const Eigen::MatrixXd H = Khat * alpha.transpose();  // m x C
  q.resize(C);
  for (int k = 0; k < C; ++k) q(k) = alpha.row(k).dot(H.col(k));
  P.resize(n, C);
  const Eigen::MatrixXd alphaT = alpha.transpose();
  for_each_chunk(n, parallel, [&](int lo, int hi) {
    P.middleRows(lo, hi - lo).noalias() = KB.middleRows(lo, hi - lo) * alphaT;
  });
}

void argmin_assign(const Eigen::VectorXd& q, const Eigen::MatrixXd& P, bool parallel,
                   std::vector<int>& assign) {
  const int n = static_cast<int>(P.rows());
  const int C = static_cast<int>(q.size());
  assign.resize(n);
  for_each_chunk(n, parallel, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      int best = 0;
      double bests = q(0) - 2.0 * P(i, 0);
      for (int k = 1; k < C; ++k) {
        const double s = q(k) - 2.0 * P(i, k);
        if (s < bests) {
          bests = s;
          best = k;
        }
      }
      assign[i] = best;
    }
  });
}

}  // namespace detail

namespace {

using detail::argmin_assign;
using detail::sweep_scores;

Membership random_membership(int n, int C, RandomSource& rng) {
  Membership u;
  u.C = C;
  u.assign.resize(n);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<int> nk(C, 0);
    for (int i = 0; i < n; ++i) {
      u.assign[i] = static_cast<int>(rng.uniform_below(C));
      ++nk[u.assign[i]];
    }
    if (std::all_of(nk.begin(), nk.end(), [](int c) { return c > 0; })) return u;
  }
  // Extremely unlikely; make the labeling valid deterministically.
  for (int k = 0; k < C; ++k) u.assign[k] = k;
  return u;
}

Membership initial_membership(int n, int C, const SolverConfig& cfg, RandomSource& rng) {
  if (cfg.init == InitKind::given) {
    const Membership& u = cfg.init_membership;
    u.validate();
    if (u.n() != n || u.C != C)
      throw DataError("init membership does not match n or C");
    return u;
  }
  return random_membership(n, C, rng);
}

/// Row-accumulation of Uhat * M without materializing Uhat: row k of the
/// result is the mean of M's rows over cluster k. Empty clusters yield zero
/// rows.
Eigen::MatrixXd uhat_times(const std::vector<int>& assign, const std::vector<int>& nk,
                           const Eigen::MatrixXd& M) {
  const int C = static_cast<int>(nk.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(C, M.cols());
  for (int i = 0; i < static_cast<int>(assign.size()); ++i)
    out.row(assign[i]) += M.row(i);
  for (int k = 0; k < C; ++k)
    if (nk[k] > 0) out.row(k) /= double(nk[k]);
  return out;
}

/// Uhat itself as a dense C x n matrix (the m == n identity-basis case).
Eigen::MatrixXd uhat_dense(const std::vector<int>& assign, const std::vector<int>& nk) {
  const int C = static_cast<int>(nk.size());
  const int n = static_cast<int>(assign.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(C, n);
  for (int i = 0; i < n; ++i)
    if (nk[assign[i]] > 0) out(assign[i], i) = 1.0 / double(nk[assign[i]]);
  return out;
}

struct GdCore {
  Eigen::MatrixXd alpha;
  GdTrace trace;
};

/// Descent on f(alpha) = 1/2 tr(alpha Khat alpha^T) - tr(G alpha^T).
GdCore gd_minimize(const Eigen::MatrixXd& G, const Eigen::MatrixXd& Khat, double epsilon,
                   const Eigen::MatrixXd* warm, int max_steps) {
  const int m = static_cast<int>(Khat.rows());

  // lambda_max via power iteration with a fixed, slightly uneven start.
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = 1.0 + 1e-3 * double((i * 2654435761u) % 97) / 97.0;
  v.normalize();
  double lmax = 0.0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd w = Khat * v;
    const double nw = w.norm();
    if (nw == 0.0) break;
    w /= nw;
    const double est = w.dot(Khat * w);
    if (it > 2 && std::abs(est - lmax) <= 1e-12 * std::abs(est)) {
      lmax = est;
      break;
    }
    lmax = est;
    v = w;
  }
  if (!(lmax > 0))
    throw NumericalError("solve_alpha_gd: Khat has no positive spectrum");
  const double step = 1.0 / lmax;

  GdCore out;
  out.alpha = warm ? *warm : Eigen::MatrixXd::Zero(G.rows(), m);
  Eigen::MatrixXd H = out.alpha * Khat;
  double f = 0.5 * (out.alpha.cwiseProduct(H)).sum() - (out.alpha.cwiseProduct(G)).sum();
  out.trace.objective.push_back(f);
  Eigen::MatrixXd g = H - G;
  const double g0 = g.norm();
  if (g0 == 0.0) {
    out.trace.converged = true;
    return out;
  }

  for (int t = 0; t < max_steps; ++t) {
    const Eigen::MatrixXd cand = out.alpha - step * g;
    const Eigen::MatrixXd Hc = cand * Khat;
    const double fc = 0.5 * (cand.cwiseProduct(Hc)).sum() - (cand.cwiseProduct(G)).sum();
    if (!(fc < f)) {
      // No representable progress left in double precision.
      out.trace.converged = true;
      return out;
    }
    out.alpha = cand;
    H = Hc;
    f = fc;
    ++out.trace.iterations;
    out.trace.objective.push_back(f);
    g = H - G;
    if (g.norm() <= epsilon * g0) {
      out.trace.converged = true;
      return out;
    }
  }
  throw NumericalError("solve_alpha_gd: no convergence within the step cap (ill-conditioned Khat?)");
}

/// Shared Lloyd loop. KB is n x m, Khat m x m; alpha_update maps the current
/// membership to C x m center coefficients. The trace entry per sweep is
/// objective_base + sum_k (n_k q_k - 2 sum_{i in k} P(i,k)) evaluated for the
/// post-sweep membership with that sweep's centers, recorded before any
/// empty-cluster repair.
ClusterResult lloyd_loop(
    const Eigen::MatrixXd& KB, const Eigen::MatrixXd& Khat, const Eigen::VectorXd& diag,
    double objective_base, int C, const SolverConfig& cfg,
    const std::function<Eigen::MatrixXd(const std::vector<int>&, const std::vector<int>&,
                                        const Eigen::MatrixXd*)>& alpha_update) {
  cfg.validate();
  const int n = static_cast<int>(KB.rows());
  if (C < 1 || C > n) throw DataError("clustering: need 1 <= C <= n");

  RandomSource rng(cfg.seed, 0);
  Membership u = initial_membership(n, C, cfg, rng);

  ClusterResult res;
  res.membership = u;
  if (cfg.record_membership_trace) res.membership_trace.push_back(u.assign);
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  std::vector<int> next(n);
  bool have_alpha = false;

  auto objective_for = [&](const std::vector<int>& assign) {
    std::vector<int> nk(C, 0);
    for (int i = 0; i < n; ++i) ++nk[assign[i]];
    double f = 0.0;
    for (int k = 0; k < C; ++k) f += double(nk[k]) * q(k);
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += P(i, assign[i]);
    return f - 2.0 * dot;
  };

  for (int t = 1; t <= cfg.maxiter; ++t) {
    const auto nk = res.membership.counts();
    alpha = alpha_update(res.membership.assign, nk, have_alpha ? &alpha : nullptr);
    have_alpha = true;

    sweep_scores(KB, Khat, alpha, cfg.parallel(), P, q);

    // The first sweep's centers are optimal for the initial membership, so
    // this is the clustering error of the random initialization.
    if (t == 1)
      res.objective_trace.push_back(objective_base +
                                    objective_for(res.membership.assign));

    argmin_assign(q, P, cfg.parallel(), next);

    // Objective of the fresh assignment under this sweep's centers.
    std::vector<int> nk_next(C, 0);
    for (int i = 0; i < n; ++i) ++nk_next[next[i]];
    res.objective_trace.push_back(objective_base + objective_for(next));
    res.iterations = t;

    // Repair empty clusters before the convergence test.
    for (int k = 0; k < C; ++k) {
      if (nk_next[k] != 0) continue;
      int pick = -1;
      if (cfg.empty_cluster_policy == EmptyClusterPolicy::reassign_farthest) {
        double bestd = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
          if (nk_next[next[i]] < 2) continue;
          const double d = q(next[i]) - 2.0 * P(i, next[i]) + diag(i);
          if (d > bestd) {
            bestd = d;
            pick = i;
          }
        }
      } else {
        int eligible = 0;
        for (int i = 0; i < n; ++i)
          if (nk_next[next[i]] >= 2) ++eligible;
        if (eligible > 0) {
          auto target = static_cast<int>(rng.uniform_below(std::uint64_t(eligible)));
          for (int i = 0; i < n && pick < 0; ++i)
            if (nk_next[next[i]] >= 2 && target-- == 0) pick = i;
        }
      }
      if (pick < 0) continue;  // every donor is a singleton: leave empty
      --nk_next[next[pick]];
      next[pick] = k;
      nk_next[k] = 1;
      ++res.empty_cluster_repairs;
    }

    if (cfg.record_membership_trace) res.membership_trace.push_back(next);
    if (next == res.membership.assign) {
      res.converged = true;
      if (t >= cfg.min_iterations) break;
    }
    res.membership.assign = next;
  }
  return res;
}

Eigen::MatrixXd solve_T(const Eigen::MatrixXd& Khat, const Eigen::MatrixXd& KB,
                        double ridge, bool allow_pinv) {
  const int m = static_cast<int>(Khat.rows());
  Eigen::MatrixXd A = Khat;
  if (ridge > 0) A.diagonal().array() += ridge * Khat.trace() / double(m);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  const bool deficient = ldlt.info() != Eigen::Success ||
                         d.minCoeff() <= 1e-12 * std::max(d.maxCoeff(), 1e-300);
  if (!deficient) {
    Eigen::MatrixXd T = ldlt.solve(KB.transpose()).transpose();
    const double resid = (T * A - KB).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, KB.cwiseAbs().maxCoeff());
    if (T.allFinite() && resid <= 1e-6 * scale) return T;
  }
  if (!allow_pinv)
    throw NumericalError("solve_alpha_direct: singular Khat with ridge 0 and pseudo-inverse disabled");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  return cod.solve(KB.transpose()).transpose();
}

}  // namespace

double clustering_objective(const FullKernel& K, const Membership& U) {
  U.validate();
  if (U.n() != K.n()) throw DataError("clustering_objective: size mismatch");
  const NormalizedMembership ut = l2_normalize(U);
  return K.matrix.trace() - (ut.rows * K.matrix * ut.rows.transpose()).trace();
}

ClusterResult kernel_kmeans(const FullKernel& K, int C, const SolverConfig& cfg) {
  const Eigen::VectorXd diag = K.matrix.diagonal();
  const double base = K.matrix.trace();
  auto update = [](const std::vector<int>& assign, const std::vector<int>& nk,
                   const Eigen::MatrixXd*) { return uhat_dense(assign, nk); };
  return lloyd_loop(K.matrix, K.matrix, diag, base, C, cfg, update);
}

CenterCoefficients solve_alpha_direct(const NormalizedMembership& uhat,
                                      const Eigen::MatrixXd& KB,
                                      const Eigen::MatrixXd& Khat, double ridge,
                                      bool allow_pseudo_inverse) {
  if (uhat.rows.cols() != KB.rows() || KB.cols() != Khat.rows() ||
      Khat.rows() != Khat.cols())
    throw DataError("solve_alpha_direct: shape mismatch");
  const Eigen::MatrixXd G = uhat.rows * KB;  // C x m
  const Eigen::MatrixXd T = solve_T(Khat, G, ridge, allow_pseudo_inverse);
  return CenterCoefficients{T};
}

CenterCoefficients solve_alpha_gd(const NormalizedMembership& uhat,
                                  const Eigen::MatrixXd& KB, const Eigen::MatrixXd& Khat,
                                  double epsilon, GdTrace* trace,
                                  const Eigen::MatrixXd* warm_start, int max_steps) {
  if (uhat.rows.cols() != KB.rows() || KB.cols() != Khat.rows())
    throw DataError("solve_alpha_gd: shape mismatch");
  const Eigen::MatrixXd G = uhat.rows * KB;
  GdCore core = gd_minimize(G, Khat, epsilon, warm_start, max_steps);
  if (trace) *trace = core.trace;
  return CenterCoefficients{std::move(core.alpha)};
}

ClusterResult approx_kkm(const RectKernel& rect, const Eigen::VectorXd& diag, int C,
                         const SolverConfig& cfg) {
  const int n = rect.n();
  const int m = rect.m();
  if (m < C) throw DataError("approx_kkm: need m >= C");
  if (diag.size() != n) throw DataError("approx_kkm: diag size mismatch");

  bool identity_basis = (m == n && cfg.ridge == 0);
  if (identity_basis)
    for (int j = 0; j < m; ++j)
      if (rect.sample_indices[j] != j) {
        identity_basis = false;
        break;
      }

  if (cfg.alpha_solver == AlphaSolver::direct) {
    if (identity_basis) {
      // Every point sampled in order: K_B = Khat, so T = K_B Khat^-1 is the
      // identity and alpha reduces to Uhat exactly.
      auto update = [](const std::vector<int>& assign, const std::vector<int>& nk,
                       const Eigen::MatrixXd*) { return uhat_dense(assign, nk); };
      return lloyd_loop(rect.KB, rect.Khat, diag, 0.0, C, cfg, update);
    }
    const Eigen::MatrixXd T =
        solve_T(rect.Khat, rect.KB, cfg.ridge, cfg.allow_pseudo_inverse);
    auto update = [&T](const std::vector<int>& assign, const std::vector<int>& nk,
                       const Eigen::MatrixXd*) { return uhat_times(assign, nk, T); };
    return lloyd_loop(rect.KB, rect.Khat, diag, 0.0, C, cfg, update);
  }

  // Gradient-descent solver, warm-started from the previous iteration.
  auto update = [&rect, &cfg](const std::vector<int>& assign, const std::vector<int>& nk,
                              const Eigen::MatrixXd* warm) {
    const Eigen::MatrixXd G = uhat_times(assign, nk, rect.KB);
    GdCore core = gd_minimize(G, rect.Khat, cfg.gd_epsilon, warm, 50000);
    return core.alpha;
  };
  return lloyd_loop(rect.KB, rect.Khat, diag, 0.0, C, cfg, update);
}

ClusterResult approx_kkm(const DataMatrix& X, const KernelSpec& spec,
                         const std::vector<int>& sample_indices, int C,
                         const SolverConfig& cfg) {
  const RectKernel rect = rect_kernel(X, sample_indices, spec, cfg.parallel());
  const Eigen::VectorXd diag = kernel_diagonal(X, spec);
  return approx_kkm(rect, diag, C, cfg);
}

ClusterResult two_step_kkm(const DataMatrix& X, const KernelSpec& spec, int m, int C,
                           const SolverConfig& cfg) {
  const int n = X.n();
  if (m < C) throw DataError("two_step_kkm: need m >= C");
  if (m > n) throw DataError("two_step_kkm: need m <= n");

  RandomSource sample_rng(cfg.seed, 1);
  const std::vector<int> sample = uniform_sample(n, m, sample_rng);

  DataMatrix Xs;
  Xs.values.resize(m, X.d());
  for (int j = 0; j < m; ++j) Xs.values.row(j) = X.values.row(sample[j]);

  const FullKernel Ks = full_kernel(Xs, spec, cfg.parallel(), 0);
  ClusterResult inner = kernel_kmeans(Ks, C, cfg);

  // Fixed centers from the sample clustering; one assignment sweep over all
  // points.
  const RectKernel rect = rect_kernel(X, sample, spec, cfg.parallel());
  const auto nk = inner.membership.counts();
  const Eigen::MatrixXd alpha =
      uhat_dense(inner.membership.assign, nk);  // C x m over the sample basis
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  sweep_scores(rect.KB, rect.Khat, alpha, cfg.parallel(), P, q);
  std::vector<int> assign;
  argmin_assign(q, P, cfg.parallel(), assign);

  ClusterResult res;
  res.membership = Membership(C, std::move(assign));
  res.objective_trace = std::move(inner.objective_trace);
  res.iterations = inner.iterations;
  res.converged = inner.converged;
  res.empty_cluster_repairs = inner.empty_cluster_repairs;
  return res;
}

ClusterResult kmeans(const DataMatrix& X, int C, const SolverConfig& cfg) {
  cfg.validate();
  X.validate();
  const int n = X.n();
  const int d = X.d();
  if (C < 1 || C > n) throw DataError("kmeans: need 1 <= C <= n");

  RandomSource rng(cfg.seed, 0);

  // k-means++ seeding.
  Eigen::MatrixXd centers(C, d);
  centers.row(0) = X.values.row(static_cast<int>(rng.uniform_below(n)));
  Eigen::VectorXd d2 = (X.values.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < C; ++k) {
    const double total = d2.sum();
    int chosen = -1;
    if (total > 0) {
      const double r = rng.real() * total;
      double cum = 0.0;
      for (int i = 0; i < n; ++i) {
        cum += d2(i);
        if (cum > r) {
          chosen = i;
          break;
        }
      }
      if (chosen < 0) chosen = n - 1;
    } else {
      // All remaining mass at already-chosen points; take the first point
      // with nonzero... every point coincides with a center, any works.
      chosen = static_cast<int>(rng.uniform_below(n));
    }
    centers.row(k) = X.values.row(chosen);
    d2 = d2.cwiseMin((X.values.rowwise() - centers.row(k)).rowwise().squaredNorm());
  }

  ClusterResult res;
  res.membership.C = C;
  res.membership.assign.assign(n, 0);
  std::vector<int> next(n);

  for (int t = 1; t <= cfg.maxiter; ++t) {
    // Assignment under current centers; per-point best distance kept for the
    // objective and repairs.
    Eigen::VectorXd bestd(n);
    for_each_chunk(n, cfg.parallel(), [&](int lo, int hi) {
      for (int i = lo; i < hi; ++i) {
        int best = 0;
        double bd = (X.values.row(i) - centers.row(0)).squaredNorm();
        for (int k = 1; k < C; ++k) {
          const double dd = (X.values.row(i) - centers.row(k)).squaredNorm();
          if (dd < bd) {
            bd = dd;
            best = k;
          }
        }
        next[i] = best;
        bestd(i) = bd;
      }
    });

    double obj = 0.0;
    for (int i = 0; i < n; ++i) obj += bestd(i);
    res.objective_trace.push_back(obj);
    res.iterations = t;

    std::vector<int> nk(C, 0);
    for (int i = 0; i < n; ++i) ++nk[next[i]];
    for (int k = 0; k < C; ++k) {
      if (nk[k] != 0) continue;
      int pick = -1;
      if (cfg.empty_cluster_policy == EmptyClusterPolicy::reassign_farthest) {
        double far = -1.0;
        for (int i = 0; i < n; ++i)
          if (nk[next[i]] >= 2 && bestd(i) > far) {
            far = bestd(i);
            pick = i;
          }
      } else {
        int eligible = 0;
        for (int i = 0; i < n; ++i)
          if (nk[next[i]] >= 2) ++eligible;
        if (eligible > 0) {
          auto target = static_cast<int>(rng.uniform_below(std::uint64_t(eligible)));
          for (int i = 0; i < n; ++i)
            if (nk[next[i]] >= 2 && target-- == 0) {
              pick = i;
              break;
            }
        }
      }
      if (pick < 0) continue;
      --nk[next[pick]];
      next[pick] = k;
      nk[k] = 1;
      ++res.empty_cluster_repairs;
    }

    const bool unchanged = (t > 1 && next == res.membership.assign);
    res.membership.assign = next;
    if (unchanged) {
      res.converged = true;
      if (t >= cfg.min_iterations) break;
    }

    // Center update: mean of members, accumulated in point order.
    centers.setZero();
    for (int i = 0; i < n; ++i) centers.row(next[i]) += X.values.row(i);
    for (int k = 0; k < C; ++k)
      if (nk[k] > 0) centers.row(k) /= double(nk[k]);
  }
  return res;
}

Eigen::MatrixXd nystrom_embedding(const RectKernel& rect, int C) {
  const int m = rect.m();
  if (C > m) throw DataError("nystrom_embedding: need C <= m");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rect.Khat);
  if (es.info() != Eigen::Success)
    throw NumericalError("nystrom_embedding: eigendecomposition failed");
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmax > 0))
    throw NumericalError("nystrom_embedding: Khat has no positive eigenvalues");
  const double drop = lmax * 1e-12;

  std::vector<int> keep;
  for (int i = 0; i < m; ++i)
    if (es.eigenvalues()(i) > drop) keep.push_back(i);
  if (static_cast<int>(keep.size()) < C)
    throw NumericalError("nystrom_embedding: fewer than C positive eigenvalues");

  Eigen::MatrixXd VS(m, keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j)
    VS.col(j) = es.eigenvectors().col(keep[j]) / std::sqrt(es.eigenvalues()(keep[j]));
  const Eigen::MatrixXd B = rect.KB * VS;  // n x r, K_B Khat^-1 K_B' = B B'

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(B.transpose() * B);
  if (es2.info() != Eigen::Success)
    throw NumericalError("nystrom_embedding: inner eigendecomposition failed");
  const int r = static_cast<int>(keep.size());
  Eigen::MatrixXd E(rect.n(), C);
  for (int c = 0; c < C; ++c) {
    const int src = r - 1 - c;  // descending
    const double sig = es2.eigenvalues()(src);
    if (!(sig > 0))
      throw NumericalError("nystrom_embedding: fewer than C positive eigenvalues");
    E.col(c) = B * (es2.eigenvectors().col(src) / std::sqrt(sig));
  }
  return E;
}

ClusterResult nystrom_spectral(const RectKernel& rect, int C, const SolverConfig& cfg) {
  Eigen::MatrixXd E = nystrom_embedding(rect, C);
  for (int i = 0; i < E.rows(); ++i) {
    const double nrm = E.row(i).norm();
    if (nrm > 0) E.row(i) /= nrm;
  }
  DataMatrix embedded;
  embedded.values = std::move(E);
  return kmeans(embedded, C, cfg);
}

}  // namespace kclust
