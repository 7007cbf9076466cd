#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dalmc/dataset.hpp"
#include "dalmc/matrix.hpp"

namespace dalmc {

enum class MatrixFormat { Csv, RawF64 };

std::string to_string(MatrixFormat fmt);
MatrixFormat parse_matrix_format(const std::string& text);

// One entry per view in the manifest: file path (relative to the manifest)
// and the declared d^p x n shape.
struct ViewSpec {
  std::string path;
  Index rows = 0;
  Index cols = 0;
};

struct DatasetManifest {
  std::string name = "dataset";
  MatrixFormat format = MatrixFormat::Csv;
  std::vector<ViewSpec> views;
  std::optional<std::string> labels_file;
  std::string base_dir;  // directory of the manifest file

  // All views declare the same n, at least one view present.
  void validate() const;
};

DatasetManifest read_manifest(const std::string& path);

MultiViewDataset load_dataset(const DatasetManifest& manifest);
MultiViewDataset load_dataset(const std::string& manifest_path);

// Writes view files, the optional labels file, and `<name>.manifest` into
// `dir`; returns the manifest path.
std::string save_dataset(const MultiViewDataset& x, const std::string& dir,
                         const std::string& name, MatrixFormat fmt);

// Single-matrix files. Csv is lossless at 17 significant digits; raw-f64 is
// "MVMX" + u32le rows + u32le cols + row-major f64le payload, bit-exact.
DenseMatrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const DenseMatrix& m, const std::string& path);
DenseMatrix load_matrix_raw(const std::string& path);
void save_matrix_raw(const DenseMatrix& m, const std::string& path);

std::vector<int> load_labels(const std::string& path);
void save_labels(const std::vector<int>& labels, const std::string& path);

enum class NormalizeMode { None, UnitColumns, ZScoreRows };

std::string to_string(NormalizeMode mode);
NormalizeMode parse_normalize_mode(const std::string& text);

struct NormalizeStats {
  Index zero_columns = 0;        // columns left as zero under unit-columns
  Index zero_variance_rows = 0;  // rows left centered under zscore-rows
};

MultiViewDataset normalize(const MultiViewDataset& x, NormalizeMode mode,
                           NormalizeStats* stats = nullptr);

// Seeded synthetic multi-view benchmark: k cluster centers on a scaled
// simplex in a k-dim latent space, balanced memberships, one random linear
// map per view, additive gaussian noise.
struct SynthSpec {
  Index n = 300;
  Index k = 3;
  Index v = 3;
  std::vector<Index> dims;  // d^p per view
  double separation = 10.0;
  double noise = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

MultiViewDataset generate_synthetic(const SynthSpec& spec);

}  // namespace dalmc
