#pragma once

// CSV reading/writing for datasets, embeddings, and plain matrices. Doubles
// are written with %.17g so a write/read cycle reproduces values exactly, and
// parsed with std::from_chars so reading does not depend on locale.

#include "flowartist/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace flowartist {

inline std::string format_double(double value) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", value);
  require(len > 0 && len < static_cast<int>(sizeof(buf)), "format_double: overflow");
  return std::string(buf, static_cast<std::size_t>(len));
}

inline double parse_double(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                ": bad number '" + std::string(token) + "'");
  }
  return value;
}

inline long parse_int(std::string_view token, std::size_t line_no) {
  long value = 0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                ": bad integer '" + std::string(token) + "'");
  }
  return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << text;
  if (!out) throw std::invalid_argument("write failed: " + path);
}

/// Dataset schema: `x0,...,x{n-1},v0,...,v{n-1}[,label][,pseudotime]`.
inline void save_dataset_csv(const FlowDataset& ds, const std::string& path) {
  ds.validate();
  const Index n = ds.dim();
  std::ostringstream out;
  for (Index j = 0; j < n; ++j) out << (j ? "," : "") << "x" << j;
  for (Index j = 0; j < n; ++j) out << ",v" << j;
  if (ds.has_labels()) out << ",label";
  if (ds.has_pseudotime()) out << ",pseudotime";
  out << "\n";
  for (Index i = 0; i < ds.size(); ++i) {
    for (Index j = 0; j < n; ++j)
      out << (j ? "," : "") << format_double(ds.positions(i, j));
    for (Index j = 0; j < n; ++j) out << "," << format_double(ds.velocities(i, j));
    if (ds.has_labels()) out << "," << ds.labels[static_cast<std::size_t>(i)];
    if (ds.has_pseudotime()) out << "," << format_double(ds.pseudotime[i]);
    out << "\n";
  }
  write_text(path, out.str());
}

inline FlowDataset load_dataset_csv(const std::string& path) {
  const auto lines = read_lines(path);
  require(lines.size() >= 2, "dataset csv needs a header and at least one row");
  const auto header = split_csv_line(lines[0]);

  Index dim = 0;
  while (static_cast<std::size_t>(dim) < header.size() &&
         header[static_cast<std::size_t>(dim)] == "x" + std::to_string(dim)) {
    ++dim;
  }
  require(dim >= 1, "dataset csv header must start with x0");
  for (Index j = 0; j < dim; ++j) {
    require(header.size() > static_cast<std::size_t>(dim + j) &&
                header[static_cast<std::size_t>(dim + j)] == "v" + std::to_string(j),
            "dataset csv header must list v0..v{n-1} after positions");
  }
  std::size_t col = static_cast<std::size_t>(2 * dim);
  bool has_label = col < header.size() && header[col] == "label";
  if (has_label) ++col;
  bool has_pseudotime = col < header.size() && header[col] == "pseudotime";
  if (has_pseudotime) ++col;
  require(col == header.size(), "dataset csv header has unrecognized columns");

  const auto n_rows = static_cast<Index>(lines.size() - 1);
  FlowDataset ds;
  ds.positions.resize(n_rows, dim);
  ds.velocities.resize(n_rows, dim);
  if (has_label) ds.labels.resize(static_cast<std::size_t>(n_rows));
  if (has_pseudotime) ds.pseudotime.resize(n_rows);

  for (Index i = 0; i < n_rows; ++i) {
    const std::size_t line_no = static_cast<std::size_t>(i) + 2;
    const auto fields = split_csv_line(lines[static_cast<std::size_t>(i) + 1]);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(fields.size()));
    }
    std::size_t f = 0;
    for (Index j = 0; j < dim; ++j) ds.positions(i, j) = parse_double(fields[f++], line_no);
    for (Index j = 0; j < dim; ++j) ds.velocities(i, j) = parse_double(fields[f++], line_no);
    if (has_label)
      ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(parse_int(fields[f++], line_no));
    if (has_pseudotime) ds.pseudotime[i] = parse_double(fields[f++], line_no);
  }
  ds.validate();
  return ds;
}

/// Generic matrix with caller-supplied column names, one row per line.
inline void save_matrix_csv(const Matrix& m, const std::vector<std::string>& columns,
                            const std::string& path) {
  require(static_cast<Index>(columns.size()) == m.cols(),
          "save_matrix_csv: one column name per matrix column");
  std::ostringstream out;
  for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
  out << "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << format_double(m(i, j));
    out << "\n";
  }
  write_text(path, out.str());
}

inline std::pair<Matrix, std::vector<std::string>> load_matrix_csv(const std::string& path) {
  const auto lines = read_lines(path);
  require(!lines.empty(), "matrix csv needs a header");
  const auto header = split_csv_line(lines[0]);
  const auto cols = static_cast<Index>(header.size());
  const auto rows = static_cast<Index>(lines.size() - 1);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const std::size_t line_no = static_cast<std::size_t>(i) + 2;
    const auto fields = split_csv_line(lines[static_cast<std::size_t>(i) + 1]);
    if (static_cast<Index>(fields.size()) != cols) {
      throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(cols) + " fields");
    }
    for (Index j = 0; j < cols; ++j)
      m(i, j) = parse_double(fields[static_cast<std::size_t>(j)], line_no);
  }
  return {std::move(m), header};
}

}  // namespace flowartist
