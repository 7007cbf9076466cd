#include "dalmc/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dalmc/rng.hpp"

namespace dalmc {

namespace {

namespace fs = std::filesystem;

constexpr char kRawMagic[4] = {'M', 'V', 'M', 'X'};
constexpr std::uint64_t kStreamSynthMap = 301;
constexpr std::uint64_t kStreamSynthNoise = 302;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string t = trim(cell);
  if (t.empty()) throw ParseError("empty cell", row, col);
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) {
    throw ParseError("non-numeric cell '" + t + "'", row, col);
  }
  return value;
}

Index parse_count(const std::string& tok, const std::string& what) {
  try {
    const long long v = std::stoll(tok);
    if (v < 1) throw FormatError("manifest: " + what + " must be positive");
    return static_cast<Index>(v);
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception&) {
    throw FormatError("manifest: bad " + what + " '" + tok + "'");
  }
}

void put_u32le(std::ofstream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

std::uint32_t get_u32le(std::ifstream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

void put_f64le(std::ofstream& out, double d) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(d);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

double get_f64le(std::ifstream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string matrix_extension(MatrixFormat fmt) {
  return fmt == MatrixFormat::Csv ? ".csv" : ".mvmx";
}

}  // namespace

std::string to_string(MatrixFormat fmt) {
  return fmt == MatrixFormat::Csv ? "csv" : "raw-f64";
}

MatrixFormat parse_matrix_format(const std::string& text) {
  if (text == "csv") return MatrixFormat::Csv;
  if (text == "raw-f64") return MatrixFormat::RawF64;
  throw FormatError("unknown matrix format '" + text + "'");
}

void DatasetManifest::validate() const {
  if (views.empty()) throw FormatError("manifest: no views declared");
  const Index n = views.front().cols;
  for (const ViewSpec& vs : views) {
    if (vs.cols != n) {
      throw FormatError("manifest: view '" + vs.path + "' declares n = " +
                        std::to_string(vs.cols) + ", expected " + std::to_string(n));
    }
  }
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path + "'");

  DatasetManifest m;
  m.base_dir = fs::path(path).parent_path().string();

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw FormatError("manifest line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key == "name") {
      m.name = value;
    } else if (key == "format") {
      m.format = parse_matrix_format(value);
    } else if (key == "labels") {
      m.labels_file = value;
    } else if (key == "view") {
      const std::vector<std::string> parts = split_ws(value);
      if (parts.size() != 3) {
        throw FormatError("manifest line " + std::to_string(lineno) +
                          ": view needs '<path> <rows> <cols>'");
      }
      m.views.push_back(ViewSpec{parts[0], parse_count(parts[1], "view rows"),
                                 parse_count(parts[2], "view cols")});
    } else {
      throw FormatError("manifest line " + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
  }
  m.validate();
  return m;
}

DenseMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      row.push_back(parse_cell(cell, lineno, col));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("'" + path + "': row " + std::to_string(lineno) + " has " +
                        std::to_string(row.size()) + " cells, expected " +
                        std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("'" + path + "': empty matrix");

  DenseMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void save_matrix_csv(const DenseMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

DenseMatrix load_matrix_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kRawMagic, 4) != 0) {
    throw FormatError("'" + path + "': bad magic, not a raw-f64 matrix");
  }
  const std::uint32_t rows = get_u32le(in);
  const std::uint32_t cols = get_u32le(in);
  if (!in || rows == 0 || cols == 0) {
    throw FormatError("'" + path + "': bad raw-f64 header");
  }
  DenseMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = get_f64le(in);
    }
  }
  if (!in) throw FormatError("'" + path + "': truncated raw-f64 payload");
  return m;
}

void save_matrix_raw(const DenseMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(kRawMagic, 4);
  put_u32le(out, static_cast<std::uint32_t>(m.rows()));
  put_u32le(out, static_cast<std::uint32_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) put_f64le(out, m(i, j));
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const double v = parse_cell(t, lineno, 1);
    const int id = static_cast<int>(v);
    if (static_cast<double>(id) != v) {
      throw ParseError("label is not an integer: '" + t + "'", lineno, 1);
    }
    labels.push_back(id);
  }
  return labels;
}

void save_labels(const std::vector<int>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (int lab : labels) out << lab << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

MultiViewDataset load_dataset(const DatasetManifest& manifest) {
  manifest.validate();
  MultiViewDataset x;
  for (const ViewSpec& vs : manifest.views) {
    const std::string path = (fs::path(manifest.base_dir) / vs.path).string();
    DenseMatrix m = manifest.format == MatrixFormat::Csv ? load_matrix_csv(path)
                                                         : load_matrix_raw(path);
    if (m.rows() != vs.rows || m.cols() != vs.cols) {
      throw FormatError("'" + vs.path + "' is " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + ", manifest declares " +
                        std::to_string(vs.rows) + "x" + std::to_string(vs.cols));
    }
    x.views.push_back(std::move(m));
  }
  if (manifest.labels_file) {
    const std::string path =
        (fs::path(manifest.base_dir) / *manifest.labels_file).string();
    std::vector<int> labels = load_labels(path);
    if (static_cast<Index>(labels.size()) != x.sample_count()) {
      throw FormatError("labels file has " + std::to_string(labels.size()) +
                        " entries, expected " + std::to_string(x.sample_count()));
    }
    x.labels = std::move(labels);
  }
  x.validate();
  return x;
}

MultiViewDataset load_dataset(const std::string& manifest_path) {
  return load_dataset(read_manifest(manifest_path));
}

std::string save_dataset(const MultiViewDataset& x, const std::string& dir,
                         const std::string& name, MatrixFormat fmt) {
  x.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());

  std::ostringstream manifest;
  manifest << "# dalmc dataset manifest\n";
  manifest << "name = " << name << "\n";
  manifest << "format = " << to_string(fmt) << "\n";
  if (x.labels) {
    const std::string labels_name = name + "_labels.csv";
    save_labels(*x.labels, (fs::path(dir) / labels_name).string());
    manifest << "labels = " << labels_name << "\n";
  }
  for (Index p = 0; p < x.view_count(); ++p) {
    const std::string view_name =
        name + "_view" + std::to_string(p) + matrix_extension(fmt);
    const std::string path = (fs::path(dir) / view_name).string();
    if (fmt == MatrixFormat::Csv) {
      save_matrix_csv(x.view(p), path);
    } else {
      save_matrix_raw(x.view(p), path);
    }
    manifest << "view = " << view_name << " " << x.dim(p) << " " << x.sample_count()
             << "\n";
  }

  const std::string manifest_path = (fs::path(dir) / (name + ".manifest")).string();
  std::ofstream out(manifest_path);
  if (!out) throw IoError("cannot write '" + manifest_path + "'");
  out << manifest.str();
  if (!out) throw IoError("write failed for '" + manifest_path + "'");
  return manifest_path;
}

std::string to_string(NormalizeMode mode) {
  switch (mode) {
    case NormalizeMode::None: return "none";
    case NormalizeMode::UnitColumns: return "unit-columns";
    case NormalizeMode::ZScoreRows: return "zscore-rows";
  }
  return "none";
}

NormalizeMode parse_normalize_mode(const std::string& text) {
  if (text == "none") return NormalizeMode::None;
  if (text == "unit-columns") return NormalizeMode::UnitColumns;
  if (text == "zscore-rows") return NormalizeMode::ZScoreRows;
  throw InvalidConfig("unknown normalize mode '" + text + "'");
}

MultiViewDataset normalize(const MultiViewDataset& x, NormalizeMode mode,
                           NormalizeStats* stats) {
  x.validate();
  if (stats) *stats = NormalizeStats{};
  MultiViewDataset out = x;
  if (mode == NormalizeMode::None) return out;

  for (DenseMatrix& m : out.views) {
    if (mode == NormalizeMode::UnitColumns) {
      for (Index j = 0; j < m.cols(); ++j) {
        const double norm = m.col(j).norm();
        if (norm > 0.0) {
          m.col(j) /= norm;
        } else if (stats) {
          stats->zero_columns++;
        }
      }
    } else {  // ZScoreRows
      for (Index i = 0; i < m.rows(); ++i) {
        const double mean = m.row(i).mean();
        m.row(i).array() -= mean;
        const double var = m.row(i).squaredNorm() / static_cast<double>(m.cols());
        if (var > 0.0) {
          m.row(i) /= std::sqrt(var);
        } else if (stats) {
          stats->zero_variance_rows++;
        }
      }
    }
  }
  return out;
}

void SynthSpec::validate() const {
  if (k < 1) throw InvalidConfig("synth: k must be >= 1");
  if (n < 2 * k) throw InvalidConfig("synth: need n >= 2k");
  if (v < 1) throw InvalidConfig("synth: need at least one view");
  if (static_cast<Index>(dims.size()) != v) {
    throw InvalidConfig("synth: dims must list one dimension per view");
  }
  for (Index d : dims) {
    if (d < 1) throw InvalidConfig("synth: view dimensions must be >= 1");
  }
  if (separation < 0.0) throw InvalidConfig("synth: separation must be >= 0");
  if (noise < 0.0) throw InvalidConfig("synth: noise must be >= 0");
}

MultiViewDataset generate_synthetic(const SynthSpec& spec) {
  spec.validate();

  // Balanced block memberships: ceil(n/k) samples per cluster.
  const Index block = (spec.n + spec.k - 1) / spec.k;
  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) {
    labels[static_cast<std::size_t>(i)] = static_cast<int>(i / block);
  }

  // Latent points: cluster j sits at separation * e_j in R^k.
  DenseMatrix latent = DenseMatrix::Zero(spec.k, spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    latent(labels[static_cast<std::size_t>(i)], i) = spec.separation;
  }

  MultiViewDataset x;
  for (Index p = 0; p < spec.v; ++p) {
    const Index d = spec.dims[static_cast<std::size_t>(p)];
    Rng map_rng(derive_seed(spec.seed, kStreamSynthMap, static_cast<std::uint64_t>(p)));
    DenseMatrix view = gaussian_matrix(d, spec.k, map_rng) * latent;
    if (spec.noise > 0.0) {
      Rng noise_rng(
          derive_seed(spec.seed, kStreamSynthNoise, static_cast<std::uint64_t>(p)));
      view += spec.noise * gaussian_matrix(d, spec.n, noise_rng);
    }
    x.views.push_back(std::move(view));
  }
  x.labels = std::move(labels);
  return x;
}

}  // namespace dalmc
