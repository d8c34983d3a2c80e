#include "netfilter/sym_matrix.hpp"

#include <cmath>

namespace nf {

SymMatrix::SymMatrix(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("symmetric matrix must be square");
  if (!m.allFinite()) throw DomainError("matrix has non-finite entries");
  m_ = 0.5 * (m + m.transpose()).eval();
}

SymMatrix SymMatrix::identity(int dim) {
  if (dim < 1) throw DimensionMismatch("identity needs positive dimension");
  return SymMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

}  // namespace nf
