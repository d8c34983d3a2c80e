#include "netfilter/numcore.hpp"

#include <cmath>
#include <string>

#include "netfilter/errors.hpp"

namespace nf {

Eigen::MatrixXd cholesky(const SymMatrix& m) {
  const int d = m.dim();
  const Eigen::MatrixXd& a = m.mat();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    double diag = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(diag > 0.0) || !std::isfinite(diag))
      throw NotPositiveDefinite(
          "matrix not positive definite at pivot " + std::to_string(j), j);
    diag = std::sqrt(diag);
    l(j, j) = diag;
    for (int i = j + 1; i < d; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / diag;
    }
  }
  return l;
}

SymMatrix spd_inverse(const SymMatrix& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m.mat());
  if (llt.info() != Eigen::Success) {
    // Re-run the explicit factorization to report the failing pivot.
    cholesky(m);
    throw NotPositiveDefinite("matrix not positive definite", 0);
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.dim(), m.dim()));
  return SymMatrix(std::move(inv));
}

double spd_logdet(const SymMatrix& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m.mat());
  if (llt.info() != Eigen::Success) {
    cholesky(m);
    throw NotPositiveDefinite("matrix not positive definite", 0);
  }
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd submatrix(const SymMatrix& m, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
  const int d = m.dim();
  for (int r : rows)
    if (r < 0 || r >= d) throw IndexOutOfRange("row index out of range");
  for (int c : cols)
    if (c < 0 || c >= d) throw IndexOutOfRange("column index out of range");
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

double min_eigenvalue(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue iteration failed");
  return es.eigenvalues().minCoeff();
}

namespace {

constexpr int kGammaMaxTerms = 500;
constexpr double kGammaTol = 1e-14;

// Regularized lower incomplete gamma P(a, x), series branch (x < a + 1).
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kGammaMaxTerms; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaTol)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericError("incomplete gamma series did not converge");
}

// Regularized upper incomplete gamma Q(a, x) via Lentz continued fraction.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kGammaMaxTerms; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaTol)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double chisq_cdf(double x, int df) {
  if (df < 1) throw DomainError("chi-square needs df >= 1");
  if (x < 0.0 || !std::isfinite(x)) {
    if (std::isinf(x) && x > 0.0) return 1.0;
    throw DomainError("chi-square argument must be nonnegative");
  }
  if (x == 0.0) return 0.0;
  const double a = 0.5 * df;
  const double hx = 0.5 * x;
  if (x < df + 1.0) return gamma_p_series(a, hx);
  return 1.0 - gamma_q_cf(a, hx);
}

double quadform(const Eigen::VectorXd& v, const SymMatrix& m) {
  if (v.size() != m.dim()) throw DimensionMismatch("quadform dimensions differ");
  // Neumaier compensated summation over terms in fixed row-major order.
  double sum = 0.0, comp = 0.0;
  const int d = m.dim();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double term = v[i] * m(i, j) * v[j];
      const double t = sum + term;
      if (std::abs(sum) >= std::abs(term))
        comp += (sum - t) + term;
      else
        comp += (term - t) + sum;
      sum = t;
    }
  }
  return sum + comp;
}

}  // namespace nf
