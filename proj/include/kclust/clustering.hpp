#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kclust/core.hpp"
#include "kclust/kernels.hpp"
#include "kclust/rng.hpp"

namespace kclust {

enum class AlphaSolver { direct, gradient_descent };
enum class InitKind { random, given };
enum class EmptyClusterPolicy { reassign_farthest, reseed_random };

struct SolverConfig {
  int maxiter = 100;
  int min_iterations = 0;  // keep sweeping past convergence (benchmark mode)
  AlphaSolver alpha_solver = AlphaSolver::direct;
  double gd_epsilon = 1e-7;  // relative gradient-norm target, in (0,1)
  double ridge = 1e-8;       // scaled by tr(Khat)/m where applied
  InitKind init = InitKind::random;
  Membership init_membership;  // used when init == given
  EmptyClusterPolicy empty_cluster_policy = EmptyClusterPolicy::reassign_farthest;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = chunked parallel, 1 = serial reference path
  bool allow_pseudo_inverse = true;
  bool record_membership_trace = false;  // keep every sweep's assignment

  bool parallel() const { return threads != 1; }
  void validate() const;
};

/// Cluster centers in the sampled-point basis: row k holds the coefficients
/// of c_k(.) = sum_i alpha(k,i) kappa(xhat_i, .).
struct CenterCoefficients {
  Eigen::MatrixXd alpha;  // C x m

  int C() const { return static_cast<int>(alpha.rows()); }
  int m() const { return static_cast<int>(alpha.cols()); }
};

struct ClusterResult {
  Membership membership;
  std::vector<double> objective_trace;  // initial value, then one per sweep
  int iterations = 0;
  bool converged = false;
  int empty_cluster_repairs = 0;
  std::vector<std::vector<int>> membership_trace;  // when recording is on
};

/// Lloyd k-means in Euclidean space with k-means++ seeding.
ClusterResult kmeans(const DataMatrix& X, int C, const SolverConfig& cfg);

/// tr(K) - tr(Ut K Ut^T): the within-cluster squared-distance sum for hard
/// assignments.
double clustering_objective(const FullKernel& K, const Membership& U);

ClusterResult kernel_kmeans(const FullKernel& K, int C, const SolverConfig& cfg);

/// Clusters m sampled points with kernel k-means, then assigns every point
/// to the nearest of those fixed centers.
ClusterResult two_step_kkm(const DataMatrix& X, const KernelSpec& spec, int m, int C,
                           const SolverConfig& cfg);

/// alpha = Uhat K_B (Khat + ridge*(tr(Khat)/m) I)^-1. With ridge == 0 the
/// symmetric factorization is used directly, falling back to a pseudo-inverse
/// solve when it reports rank deficiency (unless disabled).
CenterCoefficients solve_alpha_direct(const NormalizedMembership& uhat,
                                      const Eigen::MatrixXd& KB,
                                      const Eigen::MatrixXd& Khat, double ridge,
                                      bool allow_pseudo_inverse = true);

struct GdTrace {
  std::vector<double> objective;  // initial value, then one per accepted step
  int iterations = 0;
  bool converged = false;
};

/// Gradient descent on 1/2 tr(alpha Khat alpha^T) - tr(Uhat K_B alpha^T) with
/// step 1/lambda_max(Khat); stops when the gradient norm falls below
/// epsilon times its initial value. Requires a well-conditioned Khat.
CenterCoefficients solve_alpha_gd(const NormalizedMembership& uhat,
                                  const Eigen::MatrixXd& KB, const Eigen::MatrixXd& Khat,
                                  double epsilon, GdTrace* trace = nullptr,
                                  const Eigen::MatrixXd* warm_start = nullptr,
                                  int max_steps = 50000);

/// Approximate kernel k-means over the given landmarks. The objective trace
/// holds the restricted objective sum_k (n_k a_k'Khat a_k - 2 u_k'K_B a_k);
/// tr(K) is never computed on this path.
ClusterResult approx_kkm(const DataMatrix& X, const KernelSpec& spec,
                         const std::vector<int>& sample_indices, int C,
                         const SolverConfig& cfg);

/// Same, against a prebuilt rectangular kernel (diag holds kappa(x_i, x_i)).
ClusterResult approx_kkm(const RectKernel& rect, const Eigen::VectorXd& diag, int C,
                         const SolverConfig& cfg);

/// Top-C eigenvector embedding of K_B Khat^-1 K_B^T (never materialized),
/// with orthonormal columns; rows are not yet normalized.
Eigen::MatrixXd nystrom_embedding(const RectKernel& rect, int C);

/// Nystrom spectral clustering: row-normalized embedding fed to Euclidean
/// k-means.
ClusterResult nystrom_spectral(const RectKernel& rect, int C, const SolverConfig& cfg);

namespace detail {

/// One assignment sweep: scores(i,k) = q_k - 2 (K_B alpha^T)(i,k) with
/// q_k = alpha_k' Khat alpha_k; returns the argmin per point (ties to the
/// lowest cluster id). P and q are exposed for the repair step and tests.
void sweep_scores(const Eigen::MatrixXd& KB, const Eigen::MatrixXd& Khat,
                  const Eigen::MatrixXd& alpha, bool parallel, Eigen::MatrixXd& P,
                  Eigen::VectorXd& q);

void argmin_assign(const Eigen::VectorXd& q, const Eigen::MatrixXd& P, bool parallel,
                   std::vector<int>& assign);

}  // namespace detail

}  // namespace kclust
