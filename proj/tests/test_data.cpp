#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "dalmc/io.hpp"
#include "dalmc/kmeans.hpp"
#include "dalmc/metrics.hpp"
#include "dalmc/rng.hpp"

using namespace dalmc;
namespace fs = std::filesystem;

namespace {

fs::path test_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dalmc_tests" / name;
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(),
                     sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("load a single csv view") {
  const fs::path dir = test_dir("single_csv");
  write_file(dir / "v0.csv", "1,2,3\n4,5,6\n");
  write_file(dir / "d.manifest",
             "name = tiny\nformat = csv\nview = v0.csv 2 3\n");

  const MultiViewDataset x = load_dataset((dir / "d.manifest").string());
  CHECK(x.view_count() == 1);
  CHECK(x.dim(0) == 2);
  CHECK(x.sample_count() == 3);
  CHECK(x.view(0)(1, 2) == doctest::Approx(6.0));
  CHECK_FALSE(x.labels.has_value());
}

TEST_CASE("manifest rejects mismatched sample counts") {
  const fs::path dir = test_dir("bad_n");
  write_file(dir / "a.csv", "1,2,3\n");
  write_file(dir / "b.csv", "1,2,3,4\n");
  write_file(dir / "d.manifest",
             "format = csv\nview = a.csv 1 3\nview = b.csv 1 4\n");
  CHECK_THROWS_AS(load_dataset((dir / "d.manifest").string()), FormatError);
}

TEST_CASE("declared shape must match the file") {
  const fs::path dir = test_dir("bad_shape");
  write_file(dir / "a.csv", "1,2,3\n4,5,6\n");
  write_file(dir / "d.manifest", "format = csv\nview = a.csv 3 3\n");
  CHECK_THROWS_AS(load_dataset((dir / "d.manifest").string()), FormatError);
}

TEST_CASE("missing files raise IoError") {
  const fs::path dir = test_dir("missing");
  write_file(dir / "d.manifest", "format = csv\nview = nowhere.csv 1 3\n");
  CHECK_THROWS_AS(load_dataset((dir / "d.manifest").string()), IoError);
  CHECK_THROWS_AS(read_manifest((dir / "absent.manifest").string()), IoError);
}

TEST_CASE("non-numeric cells raise ParseError with location") {
  const fs::path dir = test_dir("bad_cell");
  write_file(dir / "a.csv", "1,2,3\n4,oops,6\n");
  try {
    load_matrix_csv((dir / "a.csv").string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row == 2);
    CHECK(e.col == 2);
  }
}

TEST_CASE("labels load and length-check") {
  const fs::path dir = test_dir("labels");
  write_file(dir / "a.csv", "1,2,3\n");
  write_file(dir / "y.csv", "0\n1\n1\n");
  write_file(dir / "d.manifest",
             "format = csv\nlabels = y.csv\nview = a.csv 1 3\n");
  const MultiViewDataset x = load_dataset((dir / "d.manifest").string());
  REQUIRE(x.labels.has_value());
  CHECK(*x.labels == std::vector<int>{0, 1, 1});

  write_file(dir / "y.csv", "0\n1\n");
  CHECK_THROWS_AS(load_dataset((dir / "d.manifest").string()), FormatError);
}

TEST_CASE("raw-f64 round trip is bit identical") {
  SynthSpec spec;
  spec.n = 24;
  spec.k = 3;
  spec.v = 2;
  spec.dims = {5, 7};
  spec.seed = 10;
  const MultiViewDataset x = generate_synthetic(spec);

  const fs::path dir = test_dir("raw_roundtrip");
  const std::string manifest =
      save_dataset(x, dir.string(), "rt", MatrixFormat::RawF64);
  const MultiViewDataset y = load_dataset(manifest);
  REQUIRE(y.view_count() == 2);
  for (Index p = 0; p < 2; ++p) CHECK(bitwise_equal(x.view(p), y.view(p)));
  REQUIRE(y.labels.has_value());
  CHECK(*y.labels == *x.labels);
}

TEST_CASE("csv round trip is bit identical at 17 digits") {
  SynthSpec spec;
  spec.n = 12;
  spec.k = 2;
  spec.v = 1;
  spec.dims = {4};
  spec.seed = 77;
  const MultiViewDataset x = generate_synthetic(spec);

  const fs::path dir = test_dir("csv_roundtrip");
  const std::string manifest = save_dataset(x, dir.string(), "rt", MatrixFormat::Csv);
  const MultiViewDataset y = load_dataset(manifest);
  CHECK(bitwise_equal(x.view(0), y.view(0)));
}

TEST_CASE("raw-f64 rejects a bad magic") {
  const fs::path dir = test_dir("bad_magic");
  write_file(dir / "x.mvmx", "NOPE....payload");
  CHECK_THROWS_AS(load_matrix_raw((dir / "x.mvmx").string()), FormatError);
}

TEST_CASE("unit-columns normalization") {
  MultiViewDataset x;
  DenseMatrix m(2, 3);
  m << 3, 0, 1, 4, 0, 0;
  x.views.push_back(m);

  NormalizeStats stats;
  const MultiViewDataset y = normalize(x, NormalizeMode::UnitColumns, &stats);
  CHECK(y.view(0)(0, 0) == doctest::Approx(0.6));
  CHECK(y.view(0)(1, 0) == doctest::Approx(0.8));
  CHECK(y.view(0)(0, 2) == doctest::Approx(1.0));
  CHECK(y.view(0).col(1).norm() == doctest::Approx(0.0));
  CHECK(stats.zero_columns == 1);
}

TEST_CASE("mode none is the identity") {
  SynthSpec spec;
  spec.n = 10;
  spec.k = 2;
  spec.v = 1;
  spec.dims = {3};
  const MultiViewDataset x = generate_synthetic(spec);
  const MultiViewDataset y = normalize(x, NormalizeMode::None);
  CHECK(bitwise_equal(x.view(0), y.view(0)));
}

TEST_CASE("zscore-rows normalization") {
  MultiViewDataset x;
  DenseMatrix m(2, 4);
  m << 1, 2, 3, 4, 5, 5, 5, 5;  // second row has zero variance
  x.views.push_back(m);

  NormalizeStats stats;
  const MultiViewDataset y = normalize(x, NormalizeMode::ZScoreRows, &stats);
  CHECK(y.view(0).row(0).mean() == doctest::Approx(0.0));
  CHECK(y.view(0).row(0).squaredNorm() / 4.0 == doctest::Approx(1.0));
  CHECK(y.view(0).row(1).norm() == doctest::Approx(0.0));  // centered, not scaled
  CHECK(stats.zero_variance_rows == 1);
}

TEST_CASE("synthetic: zero noise clusters collapse per view") {
  SynthSpec spec;
  spec.n = 12;
  spec.k = 3;
  spec.v = 2;
  spec.dims = {4, 6};
  spec.noise = 0.0;
  spec.separation = 5.0;
  const MultiViewDataset x = generate_synthetic(spec);
  REQUIRE(x.labels.has_value());
  for (Index p = 0; p < 2; ++p) {
    for (Index i = 1; i < spec.n; ++i) {
      if ((*x.labels)[static_cast<std::size_t>(i)] == (*x.labels)[0]) {
        CHECK((x.view(p).col(i) - x.view(p).col(0)).norm() == doctest::Approx(0.0));
      }
    }
  }
}

TEST_CASE("synthetic is a pure function of its spec") {
  SynthSpec spec;
  spec.n = 20;
  spec.k = 2;
  spec.v = 2;
  spec.dims = {3, 5};
  spec.seed = 123;
  const MultiViewDataset a = generate_synthetic(spec);
  const MultiViewDataset b = generate_synthetic(spec);
  for (Index p = 0; p < 2; ++p) CHECK(bitwise_equal(a.view(p), b.view(p)));

  spec.seed = 124;
  const MultiViewDataset c = generate_synthetic(spec);
  CHECK_FALSE(bitwise_equal(a.view(0), c.view(0)));
}

TEST_CASE("synthetic spec validation") {
  SynthSpec spec;
  spec.n = 5;
  spec.k = 3;  // n < 2k
  spec.v = 1;
  spec.dims = {3};
  CHECK_THROWS_AS(generate_synthetic(spec), InvalidConfig);
  spec.n = 10;
  spec.dims = {3, 3};  // wrong arity
  CHECK_THROWS_AS(generate_synthetic(spec), InvalidConfig);
  spec.dims = {3};
  spec.noise = -1.0;
  CHECK_THROWS_AS(generate_synthetic(spec), InvalidConfig);
}

TEST_CASE("reference k-means solves the acceptance fixture") {
  // Concatenated raw views must be separable; this anchors the end-to-end
  // thresholds used elsewhere.
  SynthSpec spec;
  spec.n = 300;
  spec.k = 3;
  spec.v = 3;
  spec.dims = {20, 30, 40};
  spec.separation = 10.0;
  spec.noise = 0.5;
  spec.seed = 42;
  const MultiViewDataset x = generate_synthetic(spec);

  Index total_dim = 0;
  for (Index p = 0; p < x.view_count(); ++p) total_dim += x.dim(p);
  DenseMatrix stacked(total_dim, x.sample_count());
  Index at = 0;
  for (Index p = 0; p < x.view_count(); ++p) {
    stacked.middleRows(at, x.dim(p)) = x.view(p);
    at += x.dim(p);
  }

  const KMeansResult km = kmeans_fit(stacked, {3, 20, 300, 1e-7, 0});
  CHECK(acc({*x.labels, km.labels}) >= 0.9);
}
