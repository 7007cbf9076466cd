// dalmc: fit runs, parameter sweeps, synthetic data generation, and
// objective traces for the anchor-graph multi-view clustering library.
// Reports are JSON (docs/report.schema.json); sweep and trace tables are
// flat CSV for plotting.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dalmc/pipeline.hpp"
#include "dalmc/rng.hpp"

using json = nlohmann::ordered_json;
using namespace dalmc;

namespace {

constexpr std::uint64_t kStreamRerun = 501;

// Exit-code contract: 0 ok, 1 numerical failure, 2 usage/contract, 3 I/O.
int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const NumericalFailure*>(&e)) return 1;
  if (dynamic_cast<const Error*>(&e)) return 2;
  return 1;
}

int thread_count_from_env() {
  const char* raw = std::getenv("DALMC_THREADS");
  if (!raw) return 1;
  const int parsed = std::atoi(raw);
  return parsed > 0 ? parsed : 1;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CommonFlags {
  std::string manifest_path;
  Index k = 2;
  double beta = 0.1;
  Index anchors = 0;
  std::vector<Index> embed_dims;
  std::uint64_t seed = 0;
  std::string normalize = "none";
  Index restarts = 20;
  Index solver_max_iter = 100;
  double solver_rel_tol = 1e-6;
  Index kmeans_max_iter = 300;
  double kmeans_tol = 1e-7;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool with_beta = true,
                      bool with_anchors = true) {
  cmd->add_option("--manifest", f.manifest_path, "Dataset manifest path")
      ->required();
  cmd->add_option("--k", f.k, "Number of clusters")->required();
  if (with_beta) {
    cmd->add_option("--beta", f.beta, "Trade-off between factorization and "
                                      "anchor coupling (default 0.1)");
  }
  if (with_anchors) {
    cmd->add_option("--anchors,-l", f.anchors,
                    "Anchor count l (default: k)");
  }
  cmd->add_option("--embed-dim", f.embed_dims,
                  "Per-view embedding dims (one value broadcasts)");
  cmd->add_option("--seed", f.seed, "Random seed (default 0)");
  cmd->add_option("--normalize", f.normalize,
                  "none | unit-columns | zscore-rows");
  cmd->add_option("--restarts", f.restarts, "K-means restarts (default 20)");
  cmd->add_option("--max-iter", f.solver_max_iter,
                  "Solver sweep limit (default 100)");
  cmd->add_option("--rel-tol", f.solver_rel_tol,
                  "Solver relative tolerance (default 1e-6)");
  cmd->add_option("--kmeans-max-iter", f.kmeans_max_iter,
                  "Lloyd iteration limit (default 300)");
  cmd->add_option("--kmeans-tol", f.kmeans_tol,
                  "Centroid movement threshold (default 1e-7)");
}

PipelineOptions to_options(const CommonFlags& f, const MultiViewDataset& x,
                           bool want_metrics) {
  PipelineOptions opt;
  opt.k = f.k;
  opt.beta = f.beta;
  opt.anchors = f.anchors;
  if (!f.embed_dims.empty()) {
    if (f.embed_dims.size() == 1 && x.view_count() > 1) {
      opt.embed_dims.assign(static_cast<std::size_t>(x.view_count()),
                            f.embed_dims.front());
    } else if (static_cast<Index>(f.embed_dims.size()) == x.view_count()) {
      opt.embed_dims = f.embed_dims;
    } else {
      throw InvalidConfig("--embed-dim needs 1 or " +
                          std::to_string(x.view_count()) + " values");
    }
  }
  opt.seed = f.seed;
  opt.normalize = parse_normalize_mode(f.normalize);
  opt.restarts = f.restarts;
  opt.solver_max_iter = f.solver_max_iter;
  opt.solver_rel_tol = f.solver_rel_tol;
  opt.kmeans_max_iter = f.kmeans_max_iter;
  opt.kmeans_tol = f.kmeans_tol;
  opt.want_metrics = want_metrics;
  return opt;
}

json to_json(const MetricBundle& b) {
  return json{{"acc", b.acc}, {"nmi", b.nmi}, {"f1", b.f1}, {"purity", b.purity}};
}

json dataset_block(const std::string& manifest_path, const DatasetManifest& m,
                   const MultiViewDataset& x) {
  json dims = json::array();
  for (Index p = 0; p < x.view_count(); ++p) dims.push_back(x.dim(p));
  return json{{"manifest", manifest_path}, {"name", m.name},
              {"views", x.view_count()},  {"samples", x.sample_count()},
              {"dims", dims},             {"has_labels", x.labels.has_value()}};
}

json config_block(const CommonFlags& f, const PipelineResult& r) {
  json embed = json::array();
  for (Index e : r.solver_config.embed_dims) embed.push_back(e);
  return json{{"k", f.k},
              {"beta", r.solver_config.beta},
              {"anchors", r.solver_config.anchors},
              {"embed_dims", embed},
              {"seed", f.seed},
              {"normalize", f.normalize},
              {"restarts", f.restarts},
              {"solver_max_iter", f.solver_max_iter},
              {"solver_rel_tol", f.solver_rel_tol},
              {"kmeans_max_iter", f.kmeans_max_iter},
              {"kmeans_tol", f.kmeans_tol}};
}

json result_block(const PipelineResult& r) {
  json fit_block{{"iterations", r.fit.iterations},
                 {"converged", r.fit.converged},
                 {"lower_bound", r.fit.lower_bound},
                 {"objective_trace", r.fit.state.objective_trace},
                 {"degeneracies", r.fit.degeneracies}};
  json out{{"fit", fit_block},
           {"normalize_stats",
            json{{"zero_columns", r.normalize_stats.zero_columns},
                 {"zero_variance_rows", r.normalize_stats.zero_variance_rows}}},
           {"kmeans", json{{"inertia", r.kmeans.inertia},
                           {"restart_inertias", r.kmeans.restart_inertias}}}};
  if (r.metrics_best) {
    out["metrics"] = json{{"best", to_json(*r.metrics_best)},
                          {"restart_mean", to_json(*r.metrics_mean)},
                          {"restart_std", to_json(*r.metrics_std)}};
  }
  out["timing"] = json{{"normalize", r.timings.normalize},
                       {"fit", r.timings.fit},
                       {"kmeans", r.timings.kmeans},
                       {"metrics", r.timings.metrics}};
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_report(const std::string& path, const json& report) {
  write_text(path, report.dump(2) + "\n");
}

// Runs `work(i)` for i in [0, count) on DALMC_THREADS workers. Each index is
// independent and deterministic, so the results do not depend on the thread
// count; the first exception in index order is rethrown.
void parallel_for(Index count, const std::function<void(Index)>& work) {
  const int threads = std::min<int>(thread_count_from_env(), static_cast<int>(count));
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) work(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (Index i = w; i < count; i += threads) {
        try {
          work(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------- fit ----------

int cmd_fit(const CommonFlags& flags, const std::string& output,
            int metrics_request, Index reruns, std::string& stage) {
  stage = "load";
  const DatasetManifest manifest = read_manifest(flags.manifest_path);
  const MultiViewDataset x = load_dataset(manifest);

  stage = "configure";
  const bool want_metrics = metrics_request == 0 ? x.labels.has_value()
                                                 : metrics_request > 0;
  if (want_metrics && !x.labels) {
    throw InvalidConfig("labels required: dataset has no ground truth");
  }
  PipelineOptions opt = to_options(flags, x, want_metrics);

  const PipelineResult result = run_pipeline(x, opt, &stage);

  json report;
  report["schema"] = "dalmc-report-v1";
  report["command"] = "fit";
  report["dataset"] = dataset_block(flags.manifest_path, manifest, x);
  report["config"] = config_block(flags, result);
  report["config"]["reruns"] = reruns;
  report["result"] = result_block(result);

  if (reruns > 1 && want_metrics) {
    stage = "reruns";
    json rerun_rows = json::array();
    std::vector<MetricBundle> bundles;
    bundles.push_back(*result.metrics_best);
    rerun_rows.push_back(json{{"seed", flags.seed},
                              {"metrics", to_json(*result.metrics_best)}});
    for (Index r = 1; r < reruns; ++r) {
      PipelineOptions rerun_opt = opt;
      rerun_opt.seed = derive_seed(flags.seed, kStreamRerun,
                                   static_cast<std::uint64_t>(r));
      const PipelineResult rr = run_pipeline(x, rerun_opt);
      bundles.push_back(*rr.metrics_best);
      rerun_rows.push_back(json{{"seed", rerun_opt.seed},
                                {"metrics", to_json(*rr.metrics_best)}});
    }
    const MetricBundle mean = bundle_mean(bundles);
    report["reruns"] = json{{"count", reruns},
                            {"runs", rerun_rows},
                            {"mean", to_json(mean)},
                            {"std", to_json(bundle_std(bundles, mean))}};
  }

  stage = "report";
  write_report(output, report);
  return 0;
}

// ---------- sweeps ----------

struct SweepRow {
  double beta = 0.0;
  Index anchors = 0;
  bool skipped = false;
  std::string reason;
  std::optional<PipelineResult> result;
};

json sweep_row_json(const SweepRow& row, bool beta_sweep) {
  json j;
  if (beta_sweep) {
    j["beta"] = row.beta;
  } else {
    j["anchors"] = row.anchors;
  }
  if (row.skipped) {
    j["status"] = "skipped";
    j["reason"] = row.reason;
    return j;
  }
  j["status"] = "ok";
  j["metrics"] = to_json(*row.result->metrics_best);
  j["restart_mean"] = to_json(*row.result->metrics_mean);
  j["restart_std"] = to_json(*row.result->metrics_std);
  j["fit"] = json{{"iterations", row.result->fit.iterations},
                  {"converged", row.result->fit.converged},
                  {"final_objective", row.result->fit.state.objective_trace.back()}};
  j["timing"] = json{{"fit", row.result->timings.fit},
                     {"kmeans", row.result->timings.kmeans}};
  return j;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, bool beta_sweep) {
  std::string csv = beta_sweep ? "beta,acc,nmi,f1,purity\n"
                               : "anchors,acc,nmi,f1,purity,status\n";
  for (const SweepRow& row : rows) {
    csv += beta_sweep ? format_g17(row.beta) : std::to_string(row.anchors);
    if (row.skipped) {
      csv += ",,,,";
      if (!beta_sweep) csv += ",skipped";
    } else {
      const MetricBundle& m = *row.result->metrics_best;
      for (double v : {m.acc, m.nmi, m.f1, m.purity}) {
        csv += "," + format_g17(v);
      }
      if (!beta_sweep) csv += ",ok";
    }
    csv += "\n";
  }
  return csv;
}

int run_sweep(const CommonFlags& flags, const std::string& output,
              const std::string& csv_path, bool beta_sweep,
              const std::vector<double>& beta_grid,
              const std::vector<Index>& anchor_grid, std::string& stage) {
  stage = "load";
  const DatasetManifest manifest = read_manifest(flags.manifest_path);
  const MultiViewDataset x = load_dataset(manifest);
  if (!x.labels) {
    throw InvalidConfig("labels required: sweeps report metric tables");
  }

  stage = "sweep";
  const Index count = beta_sweep ? static_cast<Index>(beta_grid.size())
                                 : static_cast<Index>(anchor_grid.size());
  std::vector<SweepRow> rows(static_cast<std::size_t>(count));

  parallel_for(count, [&](Index i) {
    SweepRow& row = rows[static_cast<std::size_t>(i)];
    CommonFlags point = flags;
    if (beta_sweep) {
      row.beta = beta_grid[static_cast<std::size_t>(i)];
      point.beta = row.beta;
    } else {
      row.anchors = anchor_grid[static_cast<std::size_t>(i)];
      point.anchors = row.anchors;
    }
    const PipelineOptions opt = to_options(point, x, true);
    try {
      resolve_solver_config(x, opt);
    } catch (const InvalidConfig& e) {
      row.skipped = true;
      row.reason = e.what();
      return;
    }
    row.result = run_pipeline(x, opt);
  });

  for (const SweepRow& row : rows) {
    if (row.skipped) {
      std::cerr << "dalmc: warning: skipped infeasible grid point ("
                << row.reason << ")\n";
    }
  }

  stage = "report";
  json report;
  report["schema"] = "dalmc-report-v1";
  report["command"] = beta_sweep ? "sweep-beta" : "sweep-anchors";
  report["dataset"] = dataset_block(flags.manifest_path, manifest, x);
  {
    json grid = json::array();
    if (beta_sweep) {
      for (double b : beta_grid) grid.push_back(b);
    } else {
      for (Index l : anchor_grid) grid.push_back(l);
    }
    report["grid"] = grid;
  }
  json shared{{"k", flags.k},
              {"seed", flags.seed},
              {"normalize", flags.normalize},
              {"restarts", flags.restarts},
              {"solver_max_iter", flags.solver_max_iter},
              {"solver_rel_tol", flags.solver_rel_tol}};
  if (beta_sweep) {
    shared["anchors"] = flags.anchors > 0 ? flags.anchors : flags.k;
  } else {
    shared["beta"] = flags.beta;
  }
  report["config"] = shared;
  json jrows = json::array();
  for (const SweepRow& row : rows) jrows.push_back(sweep_row_json(row, beta_sweep));
  report["rows"] = jrows;

  write_report(output, report);
  if (!csv_path.empty()) write_text(csv_path, sweep_csv(rows, beta_sweep));
  return 0;
}

// ---------- synth ----------

int cmd_synth(const SynthSpec& spec, const std::string& out_dir,
              const std::string& name, const std::string& format,
              std::string& stage) {
  stage = "generate";
  const MultiViewDataset x = generate_synthetic(spec);
  stage = "save";
  const std::string manifest_path =
      save_dataset(x, out_dir, name, parse_matrix_format(format));
  std::cout << manifest_path << "\n";
  return 0;
}

// ---------- trace ----------

int cmd_trace(const CommonFlags& flags, const std::string& output,
              std::string& stage) {
  stage = "load";
  const MultiViewDataset loaded = load_dataset(flags.manifest_path);
  stage = "normalize";
  const MultiViewDataset x =
      normalize(loaded, parse_normalize_mode(flags.normalize));
  stage = "fit";
  const PipelineOptions opt = to_options(flags, x, false);
  const SolverConfig cfg = resolve_solver_config(x, opt);
  const FitReport report = fit(x, cfg);

  stage = "report";
  std::string csv = "iteration,objective\n";
  for (std::size_t i = 0; i < report.state.objective_trace.size(); ++i) {
    csv += std::to_string(i) + "," + format_g17(report.state.objective_trace[i]) +
           "\n";
  }
  write_text(output, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discriminative anchor learning for multi-view clustering"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string output;
  std::string csv_path;
  int metrics_request = 0;  // -1 off, 0 auto, 1 on
  Index reruns = 1;

  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit, cluster, and evaluate");
  add_common_flags(fit_cmd, flags);
  fit_cmd->add_option("--output,-o", output, "Report path (JSON)")->required();
  fit_cmd->add_flag_callback("--metrics", [&] { metrics_request = 1; },
                             "Require metric evaluation (needs labels)");
  fit_cmd->add_flag_callback("--no-metrics", [&] { metrics_request = -1; },
                             "Skip metric evaluation");
  fit_cmd->add_option("--reruns", reruns,
                      "Whole-pipeline reruns for mean/std reporting (default 1)");

  std::vector<double> beta_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  CLI::App* sweep_beta = app.add_subcommand("sweep-beta", "Sweep the beta grid");
  add_common_flags(sweep_beta, flags, /*with_beta=*/false);
  sweep_beta->add_option("--grid", beta_grid,
                         "Beta values (default: 0.0001 0.001 0.01 0.1 1 10)");
  sweep_beta->add_option("--output,-o", output, "Report path (JSON)")->required();
  sweep_beta->add_option("--csv", csv_path, "Flat CSV table path");

  std::vector<Index> anchor_grid;
  CLI::App* sweep_anchors =
      app.add_subcommand("sweep-anchors", "Sweep the anchor-count grid");
  add_common_flags(sweep_anchors, flags, /*with_beta=*/true, /*with_anchors=*/false);
  sweep_anchors->add_option("--grid", anchor_grid,
                            "Anchor counts (default: k 2k 3k 5k)");
  sweep_anchors->add_option("--output,-o", output, "Report path (JSON)")->required();
  sweep_anchors->add_option("--csv", csv_path, "Flat CSV table path");

  SynthSpec spec;
  spec.dims = {20, 30, 40};
  spec.seed = 42;
  std::string synth_dir;
  std::string synth_name = "synthetic";
  std::string synth_format = "csv";
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--n", spec.n, "Samples (default 300)");
  synth->add_option("--k", spec.k, "Clusters (default 3)");
  synth->add_option("--views", spec.v, "Views (default 3)");
  synth->add_option("--dims", spec.dims, "Per-view dims (default 20 30 40)");
  synth->add_option("--separation", spec.separation,
                    "Latent between-cluster distance (default 10)");
  synth->add_option("--noise", spec.noise, "Per-view noise sigma (default 0.5)");
  synth->add_option("--seed", spec.seed, "Seed (default 42)");
  synth->add_option("--format", synth_format, "csv | raw-f64");
  synth->add_option("--out", synth_dir, "Output directory")->required();
  synth->add_option("--name", synth_name, "Dataset name (default synthetic)");

  CLI::App* trace = app.add_subcommand("trace", "Per-iteration objective CSV");
  add_common_flags(trace, flags);
  trace->add_option("--output,-o", output, "Trace CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (spec.v > 0 && static_cast<Index>(spec.dims.size()) == 1 && spec.v > 1) {
    spec.dims.assign(static_cast<std::size_t>(spec.v), spec.dims.front());
  }

  std::string stage = "startup";
  try {
    if (fit_cmd->parsed()) {
      return cmd_fit(flags, output, metrics_request, reruns, stage);
    }
    if (sweep_beta->parsed()) {
      if (beta_grid.empty()) throw InvalidConfig("sweep grid is empty");
      return run_sweep(flags, output, csv_path, true, beta_grid, {}, stage);
    }
    if (sweep_anchors->parsed()) {
      if (anchor_grid.empty()) {
        anchor_grid = {flags.k, 2 * flags.k, 3 * flags.k, 5 * flags.k};
      }
      return run_sweep(flags, output, csv_path, false, {}, anchor_grid, stage);
    }
    if (synth->parsed()) {
      return cmd_synth(spec, synth_dir, synth_name, synth_format, stage);
    }
    if (trace->parsed()) {
      return cmd_trace(flags, output, stage);
    }
  } catch (const std::exception& e) {
    std::cerr << "dalmc: error in stage '" << stage << "': " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 2;
}
