// Serial reference vs OpenMP-chunked paths for the hot kernels. Both paths
// produce bit-identical output (see the unit tests); this target measures the
// speedup only.
#include <benchmark/benchmark.h>

#include "kclust/clustering.hpp"
#include "kclust/datasets.hpp"
#include "kclust/ensemble.hpp"
#include "kclust/kernels.hpp"

namespace {

using namespace kclust;

DataMatrix rings(int n) {
  RandomSource rng(7, 7);
  return generate_synthetic(SyntheticKind::two_rings, n, 0.1, rng);
}

void BM_full_kernel_serial(benchmark::State& state) {
  const DataMatrix X = rings(static_cast<int>(state.range(0)));
  const KernelSpec spec = KernelSpec::rbf(0.5);
  for (auto _ : state) {
    FullKernel K = full_kernel(X, spec, /*parallel=*/false);
    benchmark::DoNotOptimize(K.matrix.data());
  }
}
BENCHMARK(BM_full_kernel_serial)->Arg(1500);

void BM_full_kernel_omp(benchmark::State& state) {
  const DataMatrix X = rings(static_cast<int>(state.range(0)));
  const KernelSpec spec = KernelSpec::rbf(0.5);
  for (auto _ : state) {
    FullKernel K = full_kernel(X, spec, /*parallel=*/true);
    benchmark::DoNotOptimize(K.matrix.data());
  }
}
BENCHMARK(BM_full_kernel_omp)->Arg(1500);

void bench_assign(benchmark::State& state, bool parallel) {
  const int n = static_cast<int>(state.range(0));
  const int m = 100, C = 2;
  const DataMatrix X = rings(n);
  const KernelSpec spec = KernelSpec::rbf(0.5);
  std::vector<int> sample(m);
  for (int j = 0; j < m; ++j) sample[j] = j * (n / m);
  const RectKernel rect = rect_kernel(X, sample, spec, parallel);
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(C, m, 1.0 / m);
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  std::vector<int> assign;
  for (auto _ : state) {
    detail::sweep_scores(rect.KB, rect.Khat, alpha, parallel, P, q);
    detail::argmin_assign(q, P, parallel, assign);
    benchmark::DoNotOptimize(assign.data());
  }
}

void BM_assign_sweep_serial(benchmark::State& state) { bench_assign(state, false); }
void BM_assign_sweep_omp(benchmark::State& state) { bench_assign(state, true); }
BENCHMARK(BM_assign_sweep_serial)->Arg(40000);
BENCHMARK(BM_assign_sweep_omp)->Arg(40000);

void bench_meta_graph(benchmark::State& state, bool parallel) {
  const int n = 2000, C = 8, r = 12;
  RandomSource rng(11, 3);
  std::vector<Membership> parts;
  for (int q = 0; q < r; ++q) {
    Membership u;
    u.C = C;
    u.assign.resize(n);
    for (int i = 0; i < n; ++i) u.assign[i] = static_cast<int>(rng.uniform_below(C));
    parts.push_back(std::move(u));
  }
  for (auto _ : state) {
    MetaGraph g = build_meta_graph(parts, parallel);
    benchmark::DoNotOptimize(g.weights.data());
  }
}

void BM_meta_graph_serial(benchmark::State& state) { bench_meta_graph(state, false); }
void BM_meta_graph_omp(benchmark::State& state) { bench_meta_graph(state, true); }
BENCHMARK(BM_meta_graph_serial);
BENCHMARK(BM_meta_graph_omp);

}  // namespace

BENCHMARK_MAIN();
