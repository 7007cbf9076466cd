#pragma once

#include <cstdint>
#include <vector>

#include "dalmc/matrix.hpp"

namespace dalmc {

struct KMeansConfig {
  Index k = 2;
  Index restarts = 20;
  Index max_iter = 300;
  double tol = 1e-7;               // centroid movement threshold
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<int> labels;         // length n, values in [0, k)
  DenseMatrix centroids;           // dim x k, columns are centroids
  double inertia = 0.0;            // min over restarts
  std::vector<double> restart_inertias;
};

// Per-restart internals, for callers that aggregate across restarts.
struct KMeansDiagnostics {
  std::vector<std::vector<int>> restart_labels;
  std::vector<std::vector<double>> lloyd_inertia;  // per restart, per iteration
};

// Lloyd's algorithm with k-means++ seeding, run `restarts` times on derived
// seeds; the restart with minimal inertia wins (ties: lowest restart index).
// Columns of `points` are samples. Empty clusters are reseeded to the point
// farthest from its assigned centroid, so the algorithm never fails on
// degenerate data.
KMeansResult kmeans_fit(const DenseMatrix& points, const KMeansConfig& cfg,
                        KMeansDiagnostics* diag = nullptr);

}  // namespace dalmc
