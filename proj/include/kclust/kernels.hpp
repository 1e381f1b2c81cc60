#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "kclust/core.hpp"

namespace kclust {

enum class KernelKind { linear, rbf, polynomial, neural };

/// Kernel function parameters. rbf uses exp(-|x-y|^2 / (2 sigma^2)),
/// polynomial (x.y + offset)^degree, neural tanh(a x.y + b).
struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double sigma = 1.0;    // rbf bandwidth
  int degree = 3;        // polynomial
  double offset = 1.0;   // polynomial
  double a = 0.0045;     // neural
  double b = 0.11;       // neural

  static KernelSpec linear();
  static KernelSpec rbf(double sigma);
  static KernelSpec polynomial(int degree, double offset = 1.0);
  static KernelSpec neural(double a, double b);

  void validate() const;
  std::string name() const;
};

/// Dense n x n Gram matrix, symmetric by construction (entries computed for
/// i <= j and mirrored).
struct FullKernel {
  Eigen::MatrixXd matrix;
  /// Set when some kappa(x,x) > 1; the bound formulas assume diag(K) <= I.
  bool diag_exceeds_one = false;

  int n() const { return static_cast<int>(matrix.rows()); }
};

/// The rectangular pair (K_B, Khat) against m sampled points. Khat is the
/// sub-block of K_B at the sampled rows, copied, never recomputed.
struct RectKernel {
  Eigen::MatrixXd KB;    // n x m
  Eigen::MatrixXd Khat;  // m x m
  std::vector<int> sample_indices;
  bool diag_exceeds_one = false;

  int n() const { return static_cast<int>(KB.rows()); }
  int m() const { return static_cast<int>(KB.cols()); }
};

double kernel_eval(const KernelSpec& spec, Eigen::Ref<const Eigen::VectorXd> x,
                   Eigen::Ref<const Eigen::VectorXd> y);

/// Refuses to materialize the n x n matrix above this point count unless the
/// caller raises the budget; the rectangular path has no such limit.
inline constexpr int kDefaultFullKernelBudget = 30000;

FullKernel full_kernel(const DataMatrix& X, const KernelSpec& spec,
                       bool parallel = true,
                       int max_full_n = kDefaultFullKernelBudget);

RectKernel rect_kernel(const DataMatrix& X, const std::vector<int>& sample_indices,
                       const KernelSpec& spec, bool parallel = true);

/// Per-point kappa(x_i, x_i), needed by the rectangular path for kernel
/// distances (the Gram diagonal is not part of K_B in general).
Eigen::VectorXd kernel_diagonal(const DataMatrix& X, const KernelSpec& spec);

/// Advisory PSD probe: smallest eigenvalue >= -tol_scale * tr(K)/n.
bool psd_check(const FullKernel& K, double tol_scale = 1e-8);

}  // namespace kclust
