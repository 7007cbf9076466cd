#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "dalmc/kmeans.hpp"
#include "dalmc/rng.hpp"

using namespace dalmc;

namespace {

// SSE of the best 2-way split, by enumerating every bipartition.
double best_two_partition_sse(const DenseMatrix& points) {
  const Index n = points.cols();
  double best = 1e300;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    DenseMatrix mean = DenseMatrix::Zero(points.rows(), 2);
    Index count[2] = {0, 0};
    for (Index i = 0; i < n; ++i) {
      const int side = (mask >> i) & 1u;
      mean.col(side) += points.col(i);
      count[side]++;
    }
    mean.col(0) /= static_cast<double>(count[0]);
    mean.col(1) /= static_cast<double>(count[1]);
    double sse = 0.0;
    for (Index i = 0; i < n; ++i) {
      sse += (points.col(i) - mean.col((mask >> i) & 1u)).squaredNorm();
    }
    best = std::min(best, sse);
  }
  return best;
}

}  // namespace

TEST_CASE("k equals n gives zero inertia") {
  Rng rng(4);
  const DenseMatrix points = gaussian_matrix(3, 6, rng);
  const KMeansResult result = kmeans_fit(points, {6, 5, 100, 1e-7, 0});
  CHECK(result.inertia == doctest::Approx(0.0));
  std::set<int> used(result.labels.begin(), result.labels.end());
  CHECK(used.size() == 6);
  for (Index i = 0; i < 6; ++i) {
    CHECK((points.col(i) - result.centroids.col(result.labels[i])).norm() <= 1e-12);
  }
}

TEST_CASE("k equals 1 gives the column mean") {
  Rng rng(8);
  const DenseMatrix points = gaussian_matrix(2, 10, rng);
  const KMeansResult result = kmeans_fit(points, {1, 3, 100, 1e-7, 0});
  const DenseMatrix mean = points.rowwise().mean();
  CHECK((result.centroids.col(0) - mean).norm() <= 1e-12);
  double expected = 0.0;
  for (Index i = 0; i < 10; ++i) expected += (points.col(i) - mean).squaredNorm();
  CHECK(result.inertia == doctest::Approx(expected));
}

TEST_CASE("two separated 1-D blobs are recovered exactly") {
  Rng rng(1);
  DenseMatrix points(1, 10);
  for (Index i = 0; i < 5; ++i) points(0, i) = 0.0 + 0.1 * rng.gaussian();
  for (Index i = 5; i < 10; ++i) points(0, i) = 100.0 + 0.1 * rng.gaussian();

  const KMeansResult result = kmeans_fit(points, {2, 20, 300, 1e-7, 1});
  for (Index i = 1; i < 5; ++i) CHECK(result.labels[i] == result.labels[0]);
  for (Index i = 6; i < 10; ++i) CHECK(result.labels[i] == result.labels[5]);
  CHECK(result.labels[0] != result.labels[5]);
  CHECK(result.inertia == doctest::Approx(best_two_partition_sse(points)));
}

TEST_CASE("result invariants") {
  Rng rng(15);
  const DenseMatrix points = gaussian_matrix(4, 40, rng);
  KMeansDiagnostics diag;
  const KMeansConfig cfg{5, 8, 100, 1e-7, 3};
  const KMeansResult result = kmeans_fit(points, cfg, &diag);

  for (int lab : result.labels) {
    CHECK(lab >= 0);
    CHECK(lab < 5);
  }
  CHECK(result.inertia ==
        doctest::Approx(*std::min_element(result.restart_inertias.begin(),
                                          result.restart_inertias.end())));
  CHECK(static_cast<Index>(result.restart_inertias.size()) == cfg.restarts);
  for (double ri : result.restart_inertias) CHECK(result.inertia <= ri + 1e-12);

  // Each point sits with its nearest centroid.
  for (Index i = 0; i < points.cols(); ++i) {
    const double assigned =
        (points.col(i) - result.centroids.col(result.labels[i])).squaredNorm();
    for (Index c = 0; c < 5; ++c) {
      CHECK(assigned <= (points.col(i) - result.centroids.col(c)).squaredNorm() + 1e-10);
    }
  }

  // Lloyd monotonicity, every restart.
  for (const std::vector<double>& trace : diag.lloyd_inertia) {
    for (std::size_t t = 1; t < trace.size(); ++t) {
      CHECK(trace[t] <= trace[t - 1] + 1e-10);
    }
  }
}

TEST_CASE("restart determinism") {
  Rng rng(42);
  const DenseMatrix points = gaussian_matrix(3, 30, rng);
  const KMeansConfig cfg{4, 6, 100, 1e-7, 9};
  const KMeansResult a = kmeans_fit(points, cfg);
  const KMeansResult b = kmeans_fit(points, cfg);
  CHECK(a.labels == b.labels);
  CHECK(a.inertia == b.inertia);
  CHECK((a.centroids - b.centroids).norm() == 0.0);
  CHECK(a.restart_inertias == b.restart_inertias);
}

TEST_CASE("duplicate-heavy data never fails") {
  DenseMatrix points(1, 6);
  points << 1.0, 1.0, 1.0, 1.0, 2.0, 2.0;
  const KMeansResult result = kmeans_fit(points, {4, 5, 100, 1e-7, 0});
  for (int lab : result.labels) {
    CHECK(lab >= 0);
    CHECK(lab < 4);
  }
  CHECK(result.inertia >= 0.0);

  // All points identical: repair must still produce k nonempty clusters.
  DenseMatrix same = DenseMatrix::Ones(2, 5);
  const KMeansResult r2 = kmeans_fit(same, {3, 2, 50, 1e-7, 7});
  std::set<int> used(r2.labels.begin(), r2.labels.end());
  CHECK(used.size() == 3);
  CHECK(r2.inertia == doctest::Approx(0.0));
}

TEST_CASE("config validation") {
  const DenseMatrix points = DenseMatrix::Ones(2, 3);
  CHECK_THROWS_AS(kmeans_fit(points, {4, 5, 100, 1e-7, 0}), InvalidConfig);
  CHECK_THROWS_AS(kmeans_fit(points, {0, 5, 100, 1e-7, 0}), InvalidConfig);
  CHECK_THROWS_AS(kmeans_fit(points, {2, 0, 100, 1e-7, 0}), InvalidConfig);
}
