#pragma once

#include <optional>

#include "dalmc/io.hpp"
#include "dalmc/kmeans.hpp"
#include "dalmc/metrics.hpp"
#include "dalmc/solver.hpp"

namespace dalmc {

// One end-to-end run: normalize -> fit -> K-means on S -> metrics.
// Shared by the CLI commands and the experiment sweeps.
struct PipelineOptions {
  Index k = 2;
  double beta = 0.1;
  Index anchors = 0;               // 0: default l = k
  std::vector<Index> embed_dims;   // empty: default rule per view
  std::uint64_t seed = 0;
  NormalizeMode normalize = NormalizeMode::None;
  Index restarts = 20;
  Index solver_max_iter = 100;
  double solver_rel_tol = 1e-6;
  Index kmeans_max_iter = 300;
  double kmeans_tol = 1e-7;
  bool want_metrics = false;       // requires dataset labels
};

struct StageTimings {
  double normalize = 0.0;
  double fit = 0.0;
  double kmeans = 0.0;
  double metrics = 0.0;
};

struct PipelineResult {
  SolverConfig solver_config;      // resolved config echo
  KMeansConfig kmeans_config;
  NormalizeStats normalize_stats;
  FitReport fit;
  KMeansResult kmeans;
  std::optional<MetricBundle> metrics_best;   // best-inertia labels
  std::optional<MetricBundle> metrics_mean;   // across K-means restarts
  std::optional<MetricBundle> metrics_std;
  StageTimings timings;
};

SolverConfig resolve_solver_config(const MultiViewDataset& x,
                                   const PipelineOptions& opt);

// `stage`, when given, tracks the currently running stage ("normalize",
// "fit", "kmeans", "metrics") so callers can name it in diagnostics.
PipelineResult run_pipeline(const MultiViewDataset& x, const PipelineOptions& opt,
                            std::string* stage = nullptr);

MetricBundle bundle_mean(const std::vector<MetricBundle>& all);
MetricBundle bundle_std(const std::vector<MetricBundle>& all,
                        const MetricBundle& mean);

}  // namespace dalmc
