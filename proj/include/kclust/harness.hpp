#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kclust/clustering.hpp"
#include "kclust/core.hpp"
#include "kclust/datasets.hpp"
#include "kclust/kernels.hpp"
#include "kclust/sampling.hpp"

namespace kclust {

struct DatasetSpec {
  // File-backed...
  std::string path;
  FileFormat format = FileFormat::csv;
  bool labels_in_last_column = false;
  // ...or synthetic.
  std::string synthetic_kind;  // empty for file-backed
  int n = 0;
  double noise = 0.0;
  std::uint64_t seed = 13;

  bool is_synthetic() const { return !synthetic_kind.empty(); }
};

struct ExperimentConfig {
  DatasetSpec dataset;
  KernelSpec kernel = KernelSpec::rbf(1.0);
  std::string algorithm = "akkm";  // kmeans | kernel_kmeans | tkkm | akkm |
                                   // nystrom_spectral | ensemble_akkm
  SamplingStrategy sampling = SamplingStrategy::uniform;
  int m = 0;
  int C = 2;
  int r = 10;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  SolverConfig solver;
  std::vector<std::string> metrics = {"error_reduction", "nmi_truth"};
  int memory_budget_n = kDefaultFullKernelBudget;
  int bench_iterations = 10;  // fixed sweep count used by scaling_bench
  bool dump_memberships = false;
  std::string output;

  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SeedRun {
  std::uint64_t seed = 0;
  double sampling_seconds = 0.0;
  double kernel_seconds = 0.0;
  double clustering_seconds = 0.0;
  double mcla_seconds = 0.0;
  int iterations = 0;
  bool converged = false;
  int empty_cluster_repairs = 0;
  std::map<std::string, double> values;
  std::vector<int> membership;  // filled when dump_memberships is set
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

struct RunReport {
  int schema_version = 1;
  nlohmann::json config;
  std::string kernel_mode;  // "full", "rect" or "none"
  double full_kernel_seconds = 0.0;
  std::vector<SeedRun> runs;
  std::map<std::string, Aggregate> aggregate;
  std::string error;  // nonempty when a later seed failed
  std::string error_kind;
  std::optional<std::uint64_t> failed_seed;

  nlohmann::json to_json() const;
};

/// Runs the configured algorithm once per seed and aggregates the requested
/// metrics. Config-level problems throw; a failure inside a later seed is
/// recorded on the report and the completed seeds are kept.
RunReport run_experiment(const ExperimentConfig& cfg);

struct ScalingReport {
  nlohmann::json config;
  std::vector<int> n_values;
  int m_fixed = 0;
  std::vector<double> median_clustering_seconds;
  std::vector<double> ratios;  // successive medians, empty for a single n
  std::vector<RunReport> per_n;

  nlohmann::json to_json() const;
};

/// Clustering wall-clock versus n at fixed m on synthetic data. Each run
/// executes exactly cfg.bench_iterations sweeps so the timings are
/// comparable across sizes.
ScalingReport scaling_bench(const ExperimentConfig& cfg, const std::vector<int>& n_values,
                            int m_fixed);

nlohmann::json kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

}  // namespace kclust
