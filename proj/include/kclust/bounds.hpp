#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "kclust/core.hpp"
#include "kclust/kernels.hpp"
#include "kclust/rng.hpp"

namespace kclust {

/// Dense symmetric eigendecomposition, eigenvalues descending. Negative
/// eigenvalues (indefinite kernels) are clipped to zero for the bound
/// formulas; the raw values are kept alongside.
struct EigenSystem {
  Eigen::VectorXd eigenvalues;      // descending, clipped at 0
  Eigen::VectorXd eigenvalues_raw;  // descending, unclipped
  Eigen::MatrixXd eigenvectors;     // columns ordered to match
  bool clipped_negative = false;

  int n() const { return static_cast<int>(eigenvalues.size()); }
};

EigenSystem eigen_system(const FullKernel& K);

/// Binary selection vector over the n points.
struct SampleMask {
  std::vector<std::uint8_t> xi;

  int n() const { return static_cast<int>(xi.size()); }
  int m() const;
  std::vector<int> indices() const;

  static SampleMask all_ones(int n);
  static SampleMask from_indices(int n, const std::vector<int>& idx);
};

/// Clustering error with centers restricted to the span of the selected
/// points; the inner minimization is solved in closed form on the selected
/// sub-kernel. Equals the full objective when the mask is all ones.
double restricted_loss(const FullKernel& K, const Membership& U, const SampleMask& xi,
                       double ridge = 0.0);

/// Upper bound on the expected restricted loss under uniform sampling of m
/// points: full loss + tr(Ut [K^-1 + (m/n) diag(K)^-1]^-1 Ut^T), evaluated
/// through the equivalent form K - K (K + (n/m) diag(K))^-1 K which needs no
/// inverse of K itself.
double theorem1_bound(const FullKernel& K, const Membership& U, int m);

struct RatioBound {
  double value = 0.0;
  bool vacuous = false;  // trace condition failed; value is +infinity
};

/// The tighter of the two eigenvalue-based bounds on E[loss(xi)]/loss(1).
RatioBound corollary1_ratio_bound(const EigenSystem& eigs, int C, int m, int n);

struct Coherence {
  double top_block = 0.0;    // (n/C) max_i |row_i(Z_1)|^2, the primary value
  double all_columns = 0.0;  // n max_i |row_i(Z)|^2, the literal variant
};

Coherence coherence(const EigenSystem& eigs, int C);

struct SpectralNormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// ||K - K_B (Khat + ridge*s*I)^-1 K_B^T||_2 by power iteration on the
/// residual operator (relative tolerance 1e-8, cap 10000 steps); the
/// residual matrix is never materialized.
SpectralNormEstimate nystrom_error(const FullKernel& K, const std::vector<int>& sample_indices,
                                   double ridge = 0.0);

struct SampleSizeCondition {
  double c1 = 1.0;
  double c2 = 1.0;
  double p = 0.0;
  double required_m = 0.0;
  bool satisfied = false;
};

struct BoundReport {
  int n = 0, C = 0, m = 0, trials = 0;
  double delta = 0.1;
  Coherence tau;
  double lambda_c_plus_1 = 0.0;
  double theoretical_rhs = 0.0;
  std::vector<double> empirical_errors;  // by trial index
  double empirical_min = 0.0, empirical_median = 0.0, empirical_max = 0.0;
  SampleSizeCondition condition;
  bool power_iteration_failure = false;
  bool clipped_negative_eigenvalues = false;
};

/// Monte-Carlo check of the spectral-norm error bound: `trials` uniform
/// m-samples, each scored by nystrom_error, against the closed-form RHS.
/// The sample-size condition is reported for the configured constants, never
/// enforced. p <= 0 defaults to C.
BoundReport theorem2_report(const FullKernel& K, int C, int m, double delta, int trials,
                            RandomSource& rng, double c1 = 1.0, double c2 = 1.0,
                            double p = 0.0, bool parallel = true);

}  // namespace kclust
