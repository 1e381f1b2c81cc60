#include "kclust/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace kclust {

SyntheticKind synthetic_kind_from_name(const std::string& name) {
  if (name == "two_rings") return SyntheticKind::two_rings;
  if (name == "gaussian_blobs") return SyntheticKind::gaussian_blobs;
  throw DataError("unknown synthetic dataset kind: " + name);
}

FileFormat file_format_from_name(const std::string& name) {
  if (name == "csv") return FileFormat::csv;
  if (name == "libsvm") return FileFormat::libsvm;
  throw DataError("unknown dataset format: " + name);
}

DataMatrix generate_synthetic(SyntheticKind kind, int n, double noise,
                              RandomSource& rng) {
  if (n < 2) throw DataError("generate_synthetic: need n >= 2");
  if (noise < 0) throw DataError("generate_synthetic: noise must be >= 0");

  DataMatrix X;
  X.values.resize(n, 2);
  X.labels = std::vector<int>(n);
  const int n0 = n - n / 2;  // label 0 takes the extra point when n is odd

  if (kind == SyntheticKind::two_rings) {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (int i = 0; i < n; ++i) {
      const int label = i < n0 ? 0 : 1;
      const double base_radius = label == 0 ? 1.0 : 2.0;
      const double theta = kTwoPi * rng.real();
      const double radius = base_radius + noise * rng.normal();
      X.values(i, 0) = radius * std::cos(theta);
      X.values(i, 1) = radius * std::sin(theta);
      (*X.labels)[i] = label;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const int label = i < n0 ? 0 : 1;
      const double cx = label == 0 ? -3.0 : 3.0;
      X.values(i, 0) = cx + noise * rng.normal();
      X.values(i, 1) = noise * rng.normal();
      (*X.labels)[i] = label;
    }
  }
  return X;
}

namespace {

double parse_double(const std::string& tok, int line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": non-numeric field '" + tok + "'");
  }
  if (pos != tok.size())
    throw DataError("line " + std::to_string(line_no) + ": non-numeric field '" + tok + "'");
  return v;
}

int parse_label(const std::string& tok, int line_no) {
  const double v = parse_double(tok, line_no);
  const double r = std::nearbyint(v);
  if (std::abs(v - r) > 1e-9)
    throw DataError("line " + std::to_string(line_no) + ": non-integer label '" + tok + "'");
  return static_cast<int>(r);
}

DataMatrix load_csv(std::istream& in, bool labels_in_last_column) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> toks;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) toks.push_back(tok);
    if (toks.empty()) continue;
    if (labels_in_last_column) {
      labels.push_back(parse_label(toks.back(), line_no));
      toks.pop_back();
      if (toks.empty())
        throw DataError("line " + std::to_string(line_no) + ": no feature columns");
    }
    std::vector<double> row;
    row.reserve(toks.size());
    for (const auto& t : toks) row.push_back(parse_double(t, line_no));
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw DataError("line " + std::to_string(line_no) + ": ragged row (" +
                      std::to_string(row.size()) + " fields, expected " +
                      std::to_string(width) + ")");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("csv: no data rows");

  DataMatrix X;
  X.values.resize(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) X.values(i, j) = rows[i][j];
  if (labels_in_last_column) X.labels = std::move(labels);
  X.validate();
  return X;
}

DataMatrix load_libsvm(std::istream& in) {
  struct Row {
    int label;
    std::vector<std::pair<int, double>> entries;  // 1-based indices
  };
  std::vector<Row> rows;
  std::string line;
  int line_no = 0;
  int max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    if (!(ss >> tok))
      continue;
    Row row;
    row.label = parse_label(tok, line_no);
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw DataError("line " + std::to_string(line_no) + ": expected index:value, got '" +
                        tok + "'");
      const int idx = parse_label(tok.substr(0, colon), line_no);
      if (idx < 1)
        throw DataError("line " + std::to_string(line_no) + ": indices are 1-based");
      row.entries.emplace_back(idx, parse_double(tok.substr(colon + 1), line_no));
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || max_index == 0) throw DataError("libsvm: no data");

  DataMatrix X;
  X.values = Eigen::MatrixXd::Zero(rows.size(), max_index);
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    labels[i] = rows[i].label;
    for (const auto& [idx, val] : rows[i].entries) X.values(i, idx - 1) = val;
  }
  X.labels = std::move(labels);
  X.validate();
  return X;
}

}  // namespace

DataMatrix load_dataset(const std::string& path, FileFormat format,
                        bool labels_in_last_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return format == FileFormat::csv ? load_csv(in, labels_in_last_column)
                                   : load_libsvm(in);
}

void save_csv(const DataMatrix& X, const std::string& path, bool include_labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  char buf[64];
  for (int i = 0; i < X.n(); ++i) {
    for (int j = 0; j < X.d(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", X.values(i, j));
      out << (j ? "," : "") << buf;
    }
    if (include_labels && X.labels) out << ',' << (*X.labels)[i];
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace kclust
