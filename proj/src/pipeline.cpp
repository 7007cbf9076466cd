#include "dalmc/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "dalmc/rng.hpp"

namespace dalmc {

namespace {

constexpr std::uint64_t kStreamKMeans = 401;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

MetricBundle bundle_mean(const std::vector<MetricBundle>& all) {
  MetricBundle m;
  for (const MetricBundle& b : all) {
    m.acc += b.acc;
    m.nmi += b.nmi;
    m.f1 += b.f1;
    m.purity += b.purity;
  }
  const double r = static_cast<double>(all.size());
  m.acc /= r;
  m.nmi /= r;
  m.f1 /= r;
  m.purity /= r;
  return m;
}

MetricBundle bundle_std(const std::vector<MetricBundle>& all,
                        const MetricBundle& mean) {
  MetricBundle s;
  for (const MetricBundle& b : all) {
    s.acc += (b.acc - mean.acc) * (b.acc - mean.acc);
    s.nmi += (b.nmi - mean.nmi) * (b.nmi - mean.nmi);
    s.f1 += (b.f1 - mean.f1) * (b.f1 - mean.f1);
    s.purity += (b.purity - mean.purity) * (b.purity - mean.purity);
  }
  const double r = static_cast<double>(all.size());
  s.acc = std::sqrt(s.acc / r);
  s.nmi = std::sqrt(s.nmi / r);
  s.f1 = std::sqrt(s.f1 / r);
  s.purity = std::sqrt(s.purity / r);
  return s;
}

SolverConfig resolve_solver_config(const MultiViewDataset& x,
                                   const PipelineOptions& opt) {
  if (opt.k < 2) throw InvalidConfig("pipeline: cluster count k must be >= 2");
  SolverConfig cfg;
  cfg.anchors = opt.anchors > 0 ? opt.anchors : opt.k;
  cfg.embed_dims = opt.embed_dims.empty()
                       ? default_embed_dims(x, opt.k, cfg.anchors)
                       : opt.embed_dims;
  cfg.beta = opt.beta;
  cfg.max_iter = opt.solver_max_iter;
  cfg.rel_tol = opt.solver_rel_tol;
  cfg.seed = opt.seed;
  cfg.validate(x);
  return cfg;
}

PipelineResult run_pipeline(const MultiViewDataset& x, const PipelineOptions& opt,
                            std::string* stage) {
  if (opt.want_metrics && !x.labels) {
    throw InvalidConfig("labels required: dataset has no ground truth");
  }

  PipelineResult result;

  if (stage) *stage = "normalize";
  auto t0 = std::chrono::steady_clock::now();
  const MultiViewDataset data = normalize(x, opt.normalize, &result.normalize_stats);
  result.timings.normalize = seconds_since(t0);

  if (stage) *stage = "fit";
  result.solver_config = resolve_solver_config(data, opt);
  result.fit = fit(data, result.solver_config);
  result.timings.fit = result.fit.wall_time;

  result.kmeans_config = KMeansConfig{opt.k, opt.restarts, opt.kmeans_max_iter,
                                      opt.kmeans_tol,
                                      derive_seed(opt.seed, kStreamKMeans, 0)};
  if (stage) *stage = "kmeans";
  t0 = std::chrono::steady_clock::now();
  KMeansDiagnostics diag;
  result.kmeans = kmeans_fit(result.fit.state.s, result.kmeans_config, &diag);
  result.timings.kmeans = seconds_since(t0);

  if (opt.want_metrics) {
    if (stage) *stage = "metrics";
    t0 = std::chrono::steady_clock::now();
    result.metrics_best = evaluate(LabelPair{*data.labels, result.kmeans.labels});
    std::vector<MetricBundle> per_restart;
    per_restart.reserve(diag.restart_labels.size());
    for (const std::vector<int>& labels : diag.restart_labels) {
      per_restart.push_back(evaluate(LabelPair{*data.labels, labels}));
    }
    result.metrics_mean = bundle_mean(per_restart);
    result.metrics_std = bundle_std(per_restart, *result.metrics_mean);
    result.timings.metrics = seconds_since(t0);
  }
  return result;
}

}  // namespace dalmc
