#include "kclust/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <unordered_set>

#include "kclust/parallel.hpp"

namespace kclust {

KernelSpec KernelSpec::linear() { return {KernelKind::linear}; }
KernelSpec KernelSpec::rbf(double sigma) {
  KernelSpec s{KernelKind::rbf};
  s.sigma = sigma;
  return s;
}
KernelSpec KernelSpec::polynomial(int degree, double offset) {
  KernelSpec s{KernelKind::polynomial};
  s.degree = degree;
  s.offset = offset;
  return s;
}
KernelSpec KernelSpec::neural(double a, double b) {
  KernelSpec s{KernelKind::neural};
  s.a = a;
  s.b = b;
  return s;
}

void KernelSpec::validate() const {
  if (kind == KernelKind::rbf && !(sigma > 0)) throw DataError("rbf kernel: sigma must be > 0");
  if (kind == KernelKind::polynomial && degree < 1)
    throw DataError("polynomial kernel: degree must be >= 1");
}

std::string KernelSpec::name() const {
  switch (kind) {
    case KernelKind::linear: return "linear";
    case KernelKind::rbf: return "rbf";
    case KernelKind::polynomial: return "polynomial";
    case KernelKind::neural: return "neural";
  }
  return "?";
}

double kernel_eval(const KernelSpec& spec, Eigen::Ref<const Eigen::VectorXd> x,
                   Eigen::Ref<const Eigen::VectorXd> y) {
  if (x.size() != y.size()) throw DataError("kernel_eval: dimension mismatch");
  switch (spec.kind) {
    case KernelKind::linear:
      return x.dot(y);
    case KernelKind::rbf: {
      const double d2 = (x - y).squaredNorm();
      return std::exp(-d2 / (2.0 * spec.sigma * spec.sigma));
    }
    case KernelKind::polynomial:
      return std::pow(x.dot(y) + spec.offset, double(spec.degree));
    case KernelKind::neural:
      return std::tanh(spec.a * x.dot(y) + spec.b);
  }
  throw DataError("kernel_eval: unknown kernel kind");
}

FullKernel full_kernel(const DataMatrix& X, const KernelSpec& spec, bool parallel,
                       int max_full_n) {
  X.validate();
  spec.validate();
  const int n = X.n();
  if (max_full_n > 0 && n > max_full_n)
    throw DataError("full_kernel: n=" + std::to_string(n) +
                    " exceeds the full-kernel memory budget (" +
                    std::to_string(max_full_n) + "); use the rectangular path (akkm)");

  FullKernel K;
  K.matrix.resize(n, n);
  // Upper triangle per row, mirrored; each (i,j) pair is owned by one chunk.
  for_each_chunk(n, parallel, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      for (int j = i; j < n; ++j) {
        const double v = kernel_eval(spec, X.values.row(i), X.values.row(j));
        K.matrix(i, j) = v;
        K.matrix(j, i) = v;
      }
    }
  });
  K.diag_exceeds_one = (K.matrix.diagonal().maxCoeff() > 1.0 + 1e-12);
  return K;
}

RectKernel rect_kernel(const DataMatrix& X, const std::vector<int>& sample_indices,
                       const KernelSpec& spec, bool parallel) {
  X.validate();
  spec.validate();
  const int n = X.n();
  const int m = static_cast<int>(sample_indices.size());
  if (m < 1 || m > n) throw DataError("rect_kernel: need 1 <= m <= n");
  std::unordered_set<int> seen;
  for (int idx : sample_indices) {
    if (idx < 0 || idx >= n) throw DataError("rect_kernel: sample index out of range");
    if (!seen.insert(idx).second) throw DataError("rect_kernel: duplicate sample index");
  }

  RectKernel R;
  R.sample_indices = sample_indices;
  R.KB.resize(n, m);
  for_each_chunk(n, parallel, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i)
      for (int j = 0; j < m; ++j)
        R.KB(i, j) = kernel_eval(spec, X.values.row(i), X.values.row(sample_indices[j]));
  });
  R.Khat.resize(m, m);
  for (int i = 0; i < m; ++i) R.Khat.row(i) = R.KB.row(sample_indices[i]);
  R.diag_exceeds_one = (R.Khat.diagonal().maxCoeff() > 1.0 + 1e-12);
  return R;
}

Eigen::VectorXd kernel_diagonal(const DataMatrix& X, const KernelSpec& spec) {
  const int n = X.n();
  Eigen::VectorXd diag(n);
  for (int i = 0; i < n; ++i)
    diag(i) = kernel_eval(spec, X.values.row(i), X.values.row(i));
  return diag;
}

bool psd_check(const FullKernel& K, double tol_scale) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K.matrix, Eigen::EigenvaluesOnly);
  const double floor = -tol_scale * K.matrix.trace() / std::max(1, K.n());
  return es.eigenvalues().minCoeff() >= floor;
}

}  // namespace kclust
