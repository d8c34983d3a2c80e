#pragma once

#include <Eigen/Dense>

#include "netfilter/errors.hpp"

namespace nf {

// Dense symmetric matrix. Construction symmetrizes as (M + M^T)/2 and rejects
// non-square or non-finite input, so downstream code can rely on exact
// symmetry without re-checking.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Eigen::MatrixXd m);

  static SymMatrix identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

}  // namespace nf
