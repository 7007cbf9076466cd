#include "dalmc/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "dalmc/rng.hpp"

namespace dalmc {

namespace {

constexpr std::uint64_t kStreamRestart = 201;

// Nearest centroid per point, ties to the lowest centroid index.
// Returns the number of labels that changed.
Index assign(const DenseMatrix& points, const DenseMatrix& centroids,
             std::vector<int>& labels) {
  const Index n = points.cols();
  const Index k = centroids.cols();
  Index changed = 0;
  for (Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = (points.col(i) - centroids.col(0)).squaredNorm();
    for (Index c = 1; c < k; ++c) {
      const double d = (points.col(i) - centroids.col(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    if (labels[static_cast<std::size_t>(i)] != best) {
      labels[static_cast<std::size_t>(i)] = best;
      ++changed;
    }
  }
  return changed;
}

// Like assign, but a point keeps its cluster on distance ties. Used for the
// final pass so empty-cluster repairs survive duplicate-heavy data.
void reassign_strict(const DenseMatrix& points, const DenseMatrix& centroids,
                     std::vector<int>& labels) {
  const Index n = points.cols();
  const Index k = centroids.cols();
  for (Index i = 0; i < n; ++i) {
    int& current = labels[static_cast<std::size_t>(i)];
    double current_d = (points.col(i) - centroids.col(current)).squaredNorm();
    for (Index c = 0; c < k; ++c) {
      const double d = (points.col(i) - centroids.col(c)).squaredNorm();
      if (d < current_d) {
        current_d = d;
        current = static_cast<int>(c);
      }
    }
  }
}

// Any empty cluster takes the point farthest from its assigned centroid,
// drawn from clusters that can spare one (>= 2 members). Ascending cluster
// order and lowest-index ties keep the rule deterministic.
bool repair_empty(const DenseMatrix& points, DenseMatrix& centroids,
                  std::vector<int>& labels) {
  const Index n = points.cols();
  const Index k = centroids.cols();
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (int lab : labels) sizes[static_cast<std::size_t>(lab)]++;

  bool repaired = false;
  for (Index c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) continue;
    Index pick = -1;
    double far = -1.0;
    for (Index i = 0; i < n; ++i) {
      const int owner = labels[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(owner)] < 2) continue;
      const double d = (points.col(i) - centroids.col(owner)).squaredNorm();
      if (d > far) {
        far = d;
        pick = i;
      }
    }
    // n >= k guarantees a donor cluster exists while any cluster is empty.
    centroids.col(c) = points.col(pick);
    sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(pick)])]--;
    labels[static_cast<std::size_t>(pick)] = static_cast<int>(c);
    sizes[static_cast<std::size_t>(c)]++;
    repaired = true;
  }
  return repaired;
}

DenseMatrix cluster_means(const DenseMatrix& points, const std::vector<int>& labels,
                          Index k) {
  DenseMatrix means = DenseMatrix::Zero(points.rows(), k);
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (Index i = 0; i < points.cols(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    means.col(c) += points.col(i);
    sizes[static_cast<std::size_t>(c)]++;
  }
  for (Index c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) {
      means.col(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    }
  }
  return means;
}

double sse(const DenseMatrix& points, const DenseMatrix& centroids,
           const std::vector<int>& labels) {
  double total = 0.0;
  for (Index i = 0; i < points.cols(); ++i) {
    total += (points.col(i) - centroids.col(labels[static_cast<std::size_t>(i)]))
                 .squaredNorm();
  }
  return total;
}

// k-means++ seeding: first centroid uniform, the rest D^2-weighted. When
// every remaining distance is zero (duplicate-heavy data) the lowest
// unchosen index is taken.
DenseMatrix seed_plus_plus(const DenseMatrix& points, Index k, Rng& rng) {
  const Index n = points.cols();
  DenseMatrix centroids(points.rows(), k);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);

  Index first = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  centroids.col(0) = points.col(first);
  chosen[static_cast<std::size_t>(first)] = 1;

  Vector d2(n);
  for (Index i = 0; i < n; ++i) {
    d2(i) = (points.col(i) - centroids.col(0)).squaredNorm();
  }
  for (Index c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      for (Index i = 0; i < n; ++i) {
        cum += d2(i);
        if (cum > target && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // rounding pushed target past the last mass
        for (Index i = n - 1; i >= 0; --i) {
          if (d2(i) > 0.0) {
            pick = i;
            break;
          }
        }
      }
    }
    if (pick < 0) {
      for (Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    centroids.col(c) = points.col(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    for (Index i = 0; i < n; ++i) {
      d2(i) = std::min(d2(i), (points.col(i) - centroids.col(c)).squaredNorm());
    }
  }
  return centroids;
}

struct SingleRun {
  std::vector<int> labels;
  DenseMatrix centroids;
  double inertia = 0.0;
  std::vector<double> inertia_trace;
};

SingleRun lloyd(const DenseMatrix& points, const KMeansConfig& cfg, Rng& rng) {
  const Index n = points.cols();
  SingleRun run;
  run.centroids = seed_plus_plus(points, cfg.k, rng);
  run.labels.assign(static_cast<std::size_t>(n), -1);

  for (Index iter = 0; iter < cfg.max_iter; ++iter) {
    const Index changed = assign(points, run.centroids, run.labels);
    const bool repaired = repair_empty(points, run.centroids, run.labels);
    const DenseMatrix updated = cluster_means(points, run.labels, cfg.k);
    const double movement = (updated - run.centroids).squaredNorm();
    run.centroids = updated;
    run.inertia_trace.push_back(sse(points, run.centroids, run.labels));
    if ((changed == 0 && !repaired) || movement <= cfg.tol) break;
  }
  // Final pass keeps labels nearest w.r.t. the returned centroids when the
  // loop stopped on max_iter or the movement threshold.
  reassign_strict(points, run.centroids, run.labels);
  run.inertia = sse(points, run.centroids, run.labels);
  run.inertia_trace.push_back(run.inertia);
  return run;
}

}  // namespace

KMeansResult kmeans_fit(const DenseMatrix& points, const KMeansConfig& cfg,
                        KMeansDiagnostics* diag) {
  require_nonempty(points, "kmeans_fit");
  require_finite(points, "kmeans_fit");
  const Index n = points.cols();
  if (cfg.k < 1) throw InvalidConfig("kmeans: k must be >= 1");
  if (cfg.k > n) {
    throw InvalidConfig("kmeans: k = " + std::to_string(cfg.k) + " exceeds n = " +
                        std::to_string(n));
  }
  if (cfg.restarts < 1) throw InvalidConfig("kmeans: restarts must be >= 1");
  if (cfg.max_iter < 1) throw InvalidConfig("kmeans: max_iter must be >= 1");

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  if (diag) {
    diag->restart_labels.clear();
    diag->lloyd_inertia.clear();
  }
  for (Index r = 0; r < cfg.restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, kStreamRestart, static_cast<std::uint64_t>(r)));
    SingleRun run = lloyd(points, cfg, rng);
    best.restart_inertias.push_back(run.inertia);
    if (diag) {
      diag->restart_labels.push_back(run.labels);
      diag->lloyd_inertia.push_back(std::move(run.inertia_trace));
    }
    if (run.inertia < best.inertia) {
      best.inertia = run.inertia;
      best.labels = std::move(run.labels);
      best.centroids = std::move(run.centroids);
    }
  }
  return best;
}

}  // namespace dalmc
