#pragma once

#include <Eigen/Dense>
#include <vector>

#include "netfilter/sym_matrix.hpp"

namespace nf {

// Lower-triangular Cholesky factor L with M = L L^T. Throws
// NotPositiveDefinite carrying the zero-based pivot index at which the
// factorization failed.
Eigen::MatrixXd cholesky(const SymMatrix& m);

// Inverse of a symmetric positive definite matrix via its Cholesky factor.
SymMatrix spd_inverse(const SymMatrix& m);

// log determinant of an SPD matrix (2 * sum log diag of the factor).
double spd_logdet(const SymMatrix& m);

// Rectangular submatrix by row/column index sets (duplicates allowed,
// order preserved). Indices are validated.
Eigen::MatrixXd submatrix(const SymMatrix& m, const std::vector<int>& rows,
                          const std::vector<int>& cols);

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const SymMatrix& m);

// Chi-square CDF with df >= 1 degrees of freedom via the regularized lower
// incomplete gamma P(df/2, x/2): series expansion for x < df + 1, continued
// fraction otherwise. x < 0 or df < 1 throws DomainError.
double chisq_cdf(double x, int df);

// v^T M v accumulated with compensated (Neumaier) summation in a fixed
// traversal order, so the result is reproducible bit-for-bit.
double quadform(const Eigen::VectorXd& v, const SymMatrix& m);

}  // namespace nf
