#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netfilter/layout.hpp"

namespace nf {

// CSV with one `# comment` header line, then a name header row, then numeric
// rows. All values must parse as finite doubles; format violations throw
// IoError with a line number.

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& col_names,
                      const std::string& comment);

Eigen::MatrixXd read_matrix_csv(const std::string& path,
                                std::vector<std::string>* col_names = nullptr);

// Flat column names "<node>.<attr>" in node-major order.
std::vector<std::string> flat_names(const NodeLayout& layout);

// Deterministic float formatting used for every emitted number (%.17g keeps
// doubles round-trippable and byte-stable).
std::string fmt_double(double v);

// TSV writing: header comment, column header, then rows.
void write_tsv(const std::string& path, const std::string& comment,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace nf
