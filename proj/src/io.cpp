#include "netfilter/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "netfilter/errors.hpp"

namespace nf {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> flat_names(const NodeLayout& layout) {
  std::vector<std::string> names;
  names.reserve(layout.dim());
  for (int i = 0; i < layout.p; ++i)
    for (int a = 0; a < layout.k; ++a)
      names.push_back(layout.node_names[i] + "." + layout.attr_names[a]);
  return names;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& col_names,
                      const std::string& comment) {
  if (static_cast<int>(col_names.size()) != m.cols())
    throw DimensionMismatch("column names do not match matrix width");
  std::ostringstream out;
  if (!comment.empty()) out << "# " << comment << "\n";
  for (std::size_t j = 0; j < col_names.size(); ++j) {
    if (j) out << ",";
    out << col_names[j];
  }
  out << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << fmt_double(m(i, j));
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const std::string& path,
                                std::vector<std::string>* col_names) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    if (!have_header) {
      header = split(line, ',');
      have_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != header.size())
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(fields[j].c_str(), &end);
      if (end == fields[j].c_str() || *end != '\0' || errno == ERANGE ||
          !std::isfinite(v))
        throw IoError(path + ":" + std::to_string(lineno) +
                      ": not a finite number: '" + fields[j] + "'");
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw IoError(path + ": missing header row");
  if (rows.empty()) throw IoError(path + ": no data rows");
  Eigen::MatrixXd m(rows.size(), header.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < header.size(); ++j) m(i, j) = rows[i][j];
  if (col_names) *col_names = std::move(header);
  return m;
}

void write_tsv(const std::string& path, const std::string& comment,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  if (!comment.empty()) out << "# " << comment << "\n";
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out << "\t";
    out << columns[j];
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw DimensionMismatch("tsv row width does not match header");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << "\t";
      out << row[j];
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace nf
