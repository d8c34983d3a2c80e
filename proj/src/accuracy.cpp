#include "netfilter/accuracy.hpp"

#include <cmath>

#include "netfilter/numcore.hpp"

namespace nf {

namespace {

Eigen::MatrixXd schur_block(const SymMatrix& omega, int node,
                            const NodeLayout& layout) {
  const auto idx = layout.node_indices(node);
  std::vector<int> rest;
  rest.reserve(layout.dim() - layout.k);
  for (int i = 0; i < layout.dim(); ++i)
    if (i / layout.k != node) rest.push_back(i);
  const Eigen::MatrixXd w11 = submatrix(omega, idx, idx);
  if (rest.empty()) return w11;
  const Eigen::MatrixXd w1r = submatrix(omega, idx, rest);
  const Eigen::MatrixXd wrr = submatrix(omega, rest, rest);
  Eigen::LLT<Eigen::MatrixXd> llt(wrr);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("principal submatrix not positive definite", 0);
  return w11 - w1r * llt.solve(w1r.transpose());
}

}  // namespace

Eigen::MatrixXd discrepancy_matrix(const SymMatrix& omega,
                                   const SymMatrix& omega_tilde, int node,
                                   const NodeLayout& layout) {
  if (omega.dim() != layout.dim() || omega_tilde.dim() != layout.dim())
    throw DimensionMismatch("precision does not match layout");
  layout.check_node(node);
  Eigen::MatrixXd d = schur_block(omega, node, layout) -
                      schur_block(omega_tilde, node, layout);
  return 0.5 * (d + d.transpose()).eval();
}

DiscrepancyReport discrepancy_moments(const SymMatrix& omega,
                                      const SymMatrix& omega_tilde, int node,
                                      const NodeLayout& layout,
                                      const Eigen::VectorXd& mu, int n) {
  if (mu.size() != layout.dim()) throw DimensionMismatch("mu length");
  if (n < 1) throw TooFewSamples("sample size must be positive");
  const int k = layout.k;

  DiscrepancyReport rep;
  rep.node = node;
  rep.d = discrepancy_matrix(omega, omega_tilde, node, layout);

  const SymMatrix sigma = spd_inverse(omega);
  const auto idx = layout.node_indices(node);
  const Eigen::MatrixXd s11 = submatrix(sigma, idx, idx);

  // Propagated mean of the node's test vector: X ~ N(sqrt(n) m1, Sigma_11).
  const Eigen::VectorXd m_full = sigma.mat() * mu;
  Eigen::VectorXd m1(k);
  for (int a = 0; a < k; ++a) m1[a] = m_full[idx[a]];

  // Symmetric similarity S^{1/2} D S^{1/2} shares the spectrum of D*Sigma_11.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_s(s11);
  if (es_s.info() != Eigen::Success) throw NumericError("eigen iteration failed");
  if (es_s.eigenvalues().minCoeff() <= 0.0)
    throw NotPositiveDefinite("node covariance block not positive definite", 0);
  const Eigen::VectorXd sqrt_ev = es_s.eigenvalues().array().sqrt();
  const Eigen::MatrixXd s_half =
      es_s.eigenvectors() * sqrt_ev.asDiagonal() * es_s.eigenvectors().transpose();
  const Eigen::MatrixXd s_half_inv = es_s.eigenvectors() *
                                     sqrt_ev.cwiseInverse().asDiagonal() *
                                     es_s.eigenvectors().transpose();

  Eigen::MatrixXd sym = s_half * rep.d * s_half;
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw NumericError("eigen iteration failed");

  // theta = S^{-1/2} E[X]; the j-th noncentrality is |P_j theta|^2.
  const Eigen::VectorXd theta = std::sqrt(static_cast<double>(n)) * (s_half_inv * m1);

  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  int start = 0;
  while (start < k) {
    int end = start + 1;
    while (end < k &&
           std::abs(es.eigenvalues()[end] - es.eigenvalues()[start]) <= 1e-8 * scale)
      ++end;
    double a = 0.0;
    Eigen::MatrixXd p_proj = Eigen::MatrixXd::Zero(k, k);
    for (int j = start; j < end; ++j) {
      a += es.eigenvalues()[j];
      p_proj += es.eigenvectors().col(j) * es.eigenvectors().col(j).transpose();
    }
    a /= (end - start);
    rep.eigenvalues.push_back(a);
    rep.multiplicities.push_back(end - start);
    rep.projectors.push_back(s_half_inv * p_proj * s_half);
    rep.noncentralities.push_back(theta.dot(p_proj * theta));
    start = end;
  }

  const Eigen::MatrixXd ds = rep.d * s11;
  rep.mean = ds.trace() + n * m1.dot(rep.d * m1);
  rep.variance = 2.0 * (ds * ds).trace() + 4.0 * n * m1.dot(rep.d * s11 * rep.d * m1);
  return rep;
}

std::pair<double, double> spectral_norm_bound(const SymMatrix& omega,
                                              const SymMatrix& omega_tilde,
                                              int node, const NodeLayout& layout,
                                              const Eigen::VectorXd& mu, int n) {
  const SymMatrix delta(omega_tilde.mat() - omega.mat());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(delta.mat(),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigen iteration failed");
  const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
  if (norm == 0.0) return {0.0, 0.0};
  const DiscrepancyReport rep =
      discrepancy_moments(omega, omega_tilde, node, layout, mu, n);
  return {std::abs(rep.mean) / norm, rep.variance / (norm * norm)};
}

}  // namespace nf
