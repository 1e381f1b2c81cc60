#include "kclust/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "kclust/bounds.hpp"
#include "kclust/ensemble.hpp"
#include "kclust/metrics.hpp"

namespace kclust {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<std::string> kAlgorithms = {
    "kmeans", "kernel_kmeans", "tkkm", "akkm", "nystrom_spectral", "ensemble_akkm"};

bool needs_sample(const std::string& alg) {
  return alg == "akkm" || alg == "nystrom_spectral" || alg == "ensemble_akkm";
}

bool known_metric(const std::string& name) {
  return name == "error_reduction" || name == "nmi_truth" || name == "ari_reference" ||
         name == "anmi_inputs";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (std::find(kAlgorithms.begin(), kAlgorithms.end(), algorithm) == kAlgorithms.end())
    throw DataError("unknown algorithm: " + algorithm);
  if (C < 2) throw DataError("config: clustering runs need C >= 2");
  if (seeds.empty()) throw DataError("config: at least one seed required");
  if ((needs_sample(algorithm) || algorithm == "tkkm") && m < 1)
    throw DataError("config: algorithm '" + algorithm + "' needs m >= 1");
  if (algorithm == "ensemble_akkm" && r < 1) throw DataError("config: need r >= 1");
  for (const auto& name : metrics) {
    if (!known_metric(name)) throw DataError("unknown metric: " + name);
    if (name == "error_reduction" && algorithm == "ensemble_akkm")
      throw DataError("error_reduction is undefined for the consensus partition");
    if (name == "anmi_inputs" && algorithm != "ensemble_akkm")
      throw DataError("anmi_inputs only applies to ensemble_akkm");
  }
  kernel.validate();
  solver.validate();
  if (!dataset.is_synthetic() && dataset.path.empty())
    throw DataError("config: dataset needs a path or a synthetic generator");
}

nlohmann::json kernel_spec_to_json(const KernelSpec& spec) {
  json j;
  j["kind"] = spec.name();
  switch (spec.kind) {
    case KernelKind::rbf: j["sigma"] = spec.sigma; break;
    case KernelKind::polynomial:
      j["degree"] = spec.degree;
      j["offset"] = spec.offset;
      break;
    case KernelKind::neural:
      j["a"] = spec.a;
      j["b"] = spec.b;
      break;
    case KernelKind::linear: break;
  }
  return j;
}

KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") return KernelSpec::linear();
  if (kind == "rbf") return KernelSpec::rbf(j.at("sigma").get<double>());
  if (kind == "polynomial")
    return KernelSpec::polynomial(j.at("degree").get<int>(), j.value("offset", 1.0));
  if (kind == "neural")
    return KernelSpec::neural(j.value("a", 0.0045), j.value("b", 0.11));
  throw DataError("unknown kernel kind: " + kind);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  const auto& ds = j.at("dataset");
  if (ds.contains("synthetic")) {
    const auto& s = ds.at("synthetic");
    cfg.dataset.synthetic_kind = s.at("kind").get<std::string>();
    cfg.dataset.n = s.at("n").get<int>();
    cfg.dataset.noise = s.value("noise", 0.0);
    cfg.dataset.seed = s.value("seed", std::uint64_t(13));
  } else {
    cfg.dataset.path = ds.at("path").get<std::string>();
    cfg.dataset.format = file_format_from_name(ds.value("format", std::string("csv")));
    cfg.dataset.labels_in_last_column = ds.value("labels", false);
  }
  if (j.contains("kernel")) cfg.kernel = kernel_spec_from_json(j.at("kernel"));
  cfg.algorithm = j.value("algorithm", cfg.algorithm);
  if (j.contains("sampling"))
    cfg.sampling = sampling_strategy_from_name(
        j.at("sampling").is_object() ? j.at("sampling").at("strategy").get<std::string>()
                                     : j.at("sampling").get<std::string>());
  cfg.m = j.value("m", cfg.m);
  cfg.C = j.value("C", cfg.C);
  cfg.r = j.value("r", cfg.r);
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    cfg.solver.maxiter = s.value("maxiter", cfg.solver.maxiter);
    cfg.solver.min_iterations = s.value("min_iterations", cfg.solver.min_iterations);
    const std::string alpha = s.value("alpha_solver", std::string("direct"));
    if (alpha == "direct")
      cfg.solver.alpha_solver = AlphaSolver::direct;
    else if (alpha == "gradient_descent")
      cfg.solver.alpha_solver = AlphaSolver::gradient_descent;
    else
      throw DataError("unknown alpha_solver: " + alpha);
    cfg.solver.gd_epsilon = s.value("gd_epsilon", cfg.solver.gd_epsilon);
    cfg.solver.ridge = s.value("ridge", cfg.solver.ridge);
    const std::string policy = s.value("empty_cluster_policy", std::string("reassign_farthest"));
    if (policy == "reassign_farthest")
      cfg.solver.empty_cluster_policy = EmptyClusterPolicy::reassign_farthest;
    else if (policy == "reseed_random")
      cfg.solver.empty_cluster_policy = EmptyClusterPolicy::reseed_random;
    else
      throw DataError("unknown empty_cluster_policy: " + policy);
    cfg.solver.threads = s.value("threads", cfg.solver.threads);
  }
  if (j.contains("metrics")) cfg.metrics = j.at("metrics").get<std::vector<std::string>>();
  cfg.memory_budget_n = j.value("memory_budget_n", cfg.memory_budget_n);
  cfg.bench_iterations = j.value("bench_iterations", cfg.bench_iterations);
  cfg.dump_memberships = j.value("dump_memberships", false);
  cfg.output = j.value("output", std::string());
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  if (dataset.is_synthetic()) {
    j["dataset"]["synthetic"] = {{"kind", dataset.synthetic_kind},
                                 {"n", dataset.n},
                                 {"noise", dataset.noise},
                                 {"seed", dataset.seed}};
  } else {
    j["dataset"] = {{"path", dataset.path},
                    {"format", dataset.format == FileFormat::csv ? "csv" : "libsvm"},
                    {"labels", dataset.labels_in_last_column}};
  }
  j["kernel"] = kernel_spec_to_json(kernel);
  j["algorithm"] = algorithm;
  j["sampling"] = sampling_strategy_name(sampling);
  j["m"] = m;
  j["C"] = C;
  j["r"] = r;
  j["seeds"] = seeds;
  j["solver"] = {
      {"maxiter", solver.maxiter},
      {"min_iterations", solver.min_iterations},
      {"alpha_solver",
       solver.alpha_solver == AlphaSolver::direct ? "direct" : "gradient_descent"},
      {"gd_epsilon", solver.gd_epsilon},
      {"ridge", solver.ridge},
      {"empty_cluster_policy",
       solver.empty_cluster_policy == EmptyClusterPolicy::reassign_farthest
           ? "reassign_farthest"
           : "reseed_random"},
      {"threads", solver.threads}};
  j["metrics"] = metrics;
  j["memory_budget_n"] = memory_budget_n;
  j["bench_iterations"] = bench_iterations;
  j["dump_memberships"] = dump_memberships;
  if (!output.empty()) j["output"] = output;
  return j;
}

nlohmann::json RunReport::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["config"] = config;
  j["kernel_mode"] = kernel_mode;
  j["full_kernel_seconds"] = full_kernel_seconds;
  j["runs"] = json::array();
  for (const auto& r : runs) {
    json rj;
    rj["seed"] = r.seed;
    rj["sampling_seconds"] = r.sampling_seconds;
    rj["kernel_seconds"] = r.kernel_seconds;
    rj["clustering_seconds"] = r.clustering_seconds;
    rj["mcla_seconds"] = r.mcla_seconds;
    rj["iterations"] = r.iterations;
    rj["converged"] = r.converged;
    rj["empty_cluster_repairs"] = r.empty_cluster_repairs;
    for (const auto& [k, v] : r.values) rj[k] = v;
    if (!r.membership.empty()) rj["membership"] = r.membership;
    j["runs"].push_back(std::move(rj));
  }
  j["aggregate"] = json::object();
  for (const auto& [k, a] : aggregate)
    j["aggregate"][k] = {{"mean", a.mean}, {"std", a.stddev}};
  if (!error.empty()) {
    j["error"] = error;
    j["error_kind"] = error_kind;
    if (failed_seed) j["failed_seed"] = *failed_seed;
  }
  return j;
}

namespace {

struct Timer {
  Clock::time_point t0 = Clock::now();
  double stop() const { return seconds_since(t0); }
};

DataMatrix materialize_dataset(const DatasetSpec& ds) {
  if (ds.is_synthetic()) {
    RandomSource rng(ds.seed, 7);
    return generate_synthetic(synthetic_kind_from_name(ds.synthetic_kind), ds.n, ds.noise,
                              rng);
  }
  return load_dataset(ds.path, ds.format, ds.labels_in_last_column);
}

Membership truth_membership(const DataMatrix& X) {
  const auto& raw = *X.labels;
  // Compact arbitrary label values to [0, C).
  std::vector<int> sorted(raw);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  Membership t;
  t.C = static_cast<int>(sorted.size());
  t.assign.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    t.assign[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), raw[i]) - sorted.begin());
  return t;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const DataMatrix X = materialize_dataset(cfg.dataset);
  const int n = X.n();

  const bool wants_nmi =
      std::find(cfg.metrics.begin(), cfg.metrics.end(), "nmi_truth") != cfg.metrics.end();
  const bool wants_ari = std::find(cfg.metrics.begin(), cfg.metrics.end(),
                                   "ari_reference") != cfg.metrics.end();
  const bool wants_er = std::find(cfg.metrics.begin(), cfg.metrics.end(),
                                  "error_reduction") != cfg.metrics.end();
  const bool wants_anmi = std::find(cfg.metrics.begin(), cfg.metrics.end(),
                                    "anmi_inputs") != cfg.metrics.end();
  if (wants_nmi && !X.labels)
    throw DataError("metric nmi_truth requires ground-truth labels");

  const bool needs_full_kernel =
      cfg.algorithm == "kernel_kmeans" || wants_ari ||
      ((cfg.sampling == SamplingStrategy::diagonal ||
        cfg.sampling == SamplingStrategy::column_norm) &&
       needs_sample(cfg.algorithm));

  RunReport report;
  report.config = cfg.to_json();
  report.kernel_mode = cfg.algorithm == "kernel_kmeans" ? "full"
                       : needs_sample(cfg.algorithm) || cfg.algorithm == "tkkm"
                           ? "rect"
                           : "none";

  std::optional<FullKernel> K;
  if (needs_full_kernel) {
    Timer t;
    K = full_kernel(X, cfg.kernel, cfg.solver.parallel(), cfg.memory_budget_n);
    report.full_kernel_seconds = t.stop();
    if (cfg.algorithm != "kernel_kmeans") report.kernel_mode = "full+rect";
  }

  const Membership truth = X.labels ? truth_membership(X) : Membership{};

  for (std::uint64_t seed : cfg.seeds) {
    SeedRun run;
    run.seed = seed;
    try {
      SolverConfig scfg = cfg.solver;
      scfg.seed = seed;

      std::vector<int> sample;
      if (needs_sample(cfg.algorithm) && cfg.algorithm != "ensemble_akkm") {
        Timer t;
        RandomSource sample_rng(seed, 2);
        switch (cfg.sampling) {
          case SamplingStrategy::uniform:
            sample = uniform_sample(n, cfg.m, sample_rng);
            break;
          case SamplingStrategy::diagonal: sample = diagonal_sample(*K, cfg.m); break;
          case SamplingStrategy::column_norm:
            sample = column_norm_sample(*K, cfg.m);
            break;
          case SamplingStrategy::kmeans:
            sample = kmeans_sample(X, cfg.m, sample_rng);
            break;
        }
        run.sampling_seconds = t.stop();
      }

      ClusterResult res;
      Membership final_membership;
      std::vector<Membership> ensemble_inputs;
      double objective_offset = 0.0;

      if (cfg.algorithm == "kmeans") {
        Timer t;
        res = kmeans(X, cfg.C, scfg);
        run.clustering_seconds = t.stop();
        final_membership = res.membership;
      } else if (cfg.algorithm == "kernel_kmeans") {
        Timer t;
        res = kernel_kmeans(*K, cfg.C, scfg);
        run.clustering_seconds = t.stop();
        final_membership = res.membership;
      } else if (cfg.algorithm == "tkkm") {
        Timer t;
        res = two_step_kkm(X, cfg.kernel, cfg.m, cfg.C, scfg);
        run.clustering_seconds = t.stop();
        final_membership = res.membership;
      } else if (cfg.algorithm == "akkm" || cfg.algorithm == "nystrom_spectral") {
        Timer tk;
        const RectKernel rect = rect_kernel(X, sample, cfg.kernel, scfg.parallel());
        const Eigen::VectorXd diag = kernel_diagonal(X, cfg.kernel);
        run.kernel_seconds = tk.stop();
        Timer t;
        res = cfg.algorithm == "akkm" ? approx_kkm(rect, diag, cfg.C, scfg)
                                      : nystrom_spectral(rect, cfg.C, scfg);
        run.clustering_seconds = t.stop();
        final_membership = res.membership;
        // The akkm trace reports the restricted objective without tr(K);
        // shift by the O(n) diagonal sum so error reduction is computed on
        // the true clustering error.
        if (cfg.algorithm == "akkm") objective_offset = diag.sum();
      } else {  // ensemble_akkm
        RandomSource ens_rng(seed, 3);
        for (int q = 0; q < cfg.r; ++q) {
          Timer ts;
          std::vector<int> s_q = uniform_sample(n, cfg.m, ens_rng);
          run.sampling_seconds += ts.stop();
          Timer tk;
          const RectKernel rect = rect_kernel(X, s_q, cfg.kernel, scfg.parallel());
          const Eigen::VectorXd diag = kernel_diagonal(X, cfg.kernel);
          run.kernel_seconds += tk.stop();
          SolverConfig qcfg = scfg;
          qcfg.seed = ens_rng.u64();
          Timer tc;
          ClusterResult rq = approx_kkm(rect, diag, cfg.C, qcfg);
          run.clustering_seconds += tc.stop();
          run.iterations += rq.iterations;
          run.empty_cluster_repairs += rq.empty_cluster_repairs;
          ensemble_inputs.push_back(std::move(rq.membership));
        }
        Timer tm;
        RandomSource mcla_rng(seed, 4);
        final_membership = mcla(ensemble_inputs, cfg.C, mcla_rng);
        run.mcla_seconds = tm.stop();
        res.converged = true;
      }

      if (cfg.algorithm != "ensemble_akkm") {
        run.iterations = res.iterations;
        run.empty_cluster_repairs = res.empty_cluster_repairs;
      }
      run.converged = res.converged;

      if (wants_er) {
        if (res.objective_trace.size() < 1)
          throw DataError("error_reduction: no objective trace");
        run.values["error_reduction"] =
            error_reduction(res.objective_trace.front() + objective_offset,
                            res.objective_trace.back() + objective_offset);
      }
      if (wants_nmi) run.values["nmi_truth"] = nmi(final_membership, truth);
      if (wants_ari) {
        SolverConfig refcfg = cfg.solver;
        refcfg.seed = seed;
        const ClusterResult ref = kernel_kmeans(*K, cfg.C, refcfg);
        run.values["ari_reference"] = ari(final_membership, ref.membership);
      }
      if (wants_anmi)
        run.values["anmi_inputs"] = anmi(final_membership, ensemble_inputs);
      if (cfg.dump_memberships) run.membership = final_membership.assign;

      report.runs.push_back(std::move(run));
    } catch (const DataError& e) {
      report.error = e.what();
      report.error_kind = "data";
      report.failed_seed = seed;
      break;
    } catch (const NumericalError& e) {
      report.error = e.what();
      report.error_kind = "numerical";
      report.failed_seed = seed;
      break;
    }
  }

  // Aggregate over the metric keys present in every completed run.
  if (!report.runs.empty()) {
    for (const auto& [key, unused] : report.runs.front().values) {
      (void)unused;
      bool everywhere = true;
      for (const auto& r : report.runs) everywhere &= r.values.count(key) > 0;
      if (!everywhere) continue;
      double mean = 0.0;
      for (const auto& r : report.runs) mean += r.values.at(key);
      mean /= double(report.runs.size());
      double var = 0.0;
      for (const auto& r : report.runs) {
        const double d = r.values.at(key) - mean;
        var += d * d;
      }
      Aggregate agg;
      agg.mean = mean;
      agg.stddev = report.runs.size() > 1
                       ? std::sqrt(var / double(report.runs.size() - 1))
                       : 0.0;
      report.aggregate[key] = agg;
    }
  }
  return report;
}

nlohmann::json ScalingReport::to_json() const {
  nlohmann::json j;
  j["config"] = config;
  j["n_values"] = n_values;
  j["m_fixed"] = m_fixed;
  j["median_clustering_seconds"] = median_clustering_seconds;
  j["ratios"] = ratios;
  j["per_n"] = nlohmann::json::array();
  for (const auto& r : per_n) j["per_n"].push_back(r.to_json());
  return j;
}

ScalingReport scaling_bench(const ExperimentConfig& cfg, const std::vector<int>& n_values,
                            int m_fixed) {
  if (n_values.empty()) throw DataError("scaling_bench: no n values");
  if (!std::is_sorted(n_values.begin(), n_values.end()))
    throw DataError("scaling_bench: n values must be increasing");
  if (!cfg.dataset.is_synthetic())
    throw DataError("scaling_bench: needs a synthetic dataset source");

  ScalingReport rep;
  rep.config = cfg.to_json();
  rep.n_values = n_values;
  rep.m_fixed = m_fixed;

  for (int n : n_values) {
    ExperimentConfig c = cfg;
    c.dataset.n = n;
    c.m = m_fixed;
    c.solver.maxiter = cfg.bench_iterations;
    c.solver.min_iterations = cfg.bench_iterations;
    RunReport r = run_experiment(c);
    if (!r.error.empty())
      throw NumericalError("scaling_bench: run at n=" + std::to_string(n) +
                           " failed: " + r.error);
    std::vector<double> times;
    for (const auto& run : r.runs) times.push_back(run.clustering_seconds);
    std::sort(times.begin(), times.end());
    const std::size_t mid = times.size() / 2;
    rep.median_clustering_seconds.push_back(
        times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]));
    rep.per_n.push_back(std::move(r));
  }
  for (std::size_t i = 1; i < rep.median_clustering_seconds.size(); ++i)
    rep.ratios.push_back(rep.median_clustering_seconds[i] /
                         rep.median_clustering_seconds[i - 1]);
  return rep;
}

}  // namespace kclust
