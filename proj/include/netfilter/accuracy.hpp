#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "netfilter/layout.hpp"
#include "netfilter/sym_matrix.hpp"

namespace nf {

// Difference of node-level Schur complements,
//   D = (W_11 - W_1r W_rr^{-1} W_r1) - (V_11 - V_1r V_rr^{-1} V_r1),
// for precisions W (reference) and V (perturbed); equals
// Sigma_11^{-1} - SigmaTilde_11^{-1}. k x k, symmetric.
Eigen::MatrixXd discrepancy_matrix(const SymMatrix& omega,
                                   const SymMatrix& omega_tilde, int node,
                                   const NodeLayout& layout);

struct DiscrepancyReport {
  int node = -1;
  Eigen::MatrixXd d;                      // k x k
  std::vector<double> eigenvalues;        // distinct a_j of D*Sigma_11
  std::vector<int> multiplicities;        // r_j
  std::vector<Eigen::MatrixXd> projectors;  // E_j with D*Sigma_11 = sum a_j E_j
  std::vector<double> noncentralities;    // delta_j, n-scaled
  double mean = 0.0;
  double variance = 0.0;
};

// Distribution of the statistic error T - T~ at a node when the filter uses a
// perturbed precision: a linear combination sum_j a_j chi2_{r_j}(delta_j) of
// independent noncentral chi-squares, with
//   a_j, E_j : eigen decomposition of D*Sigma_11 (grouped at rel 1e-8),
//   delta_j  = n * m^T Sigma_{1,.} E_j Sigma_11^{-1} Sigma_{.,1} m / ...
// evaluated through the propagated mean; mean and variance follow as
//   mean = tr(D Sigma_11) + n * mu^T Sigma_{.,1} D Sigma_{1,.} mu,
//   var  = 2 tr((D Sigma_11)^2) + 4n * mu^T Sigma_{.,1} D Sigma_11 D Sigma_{1,.} mu.
// mu is the full-length mean; Sigma comes from the reference precision.
DiscrepancyReport discrepancy_moments(const SymMatrix& omega,
                                      const SymMatrix& omega_tilde, int node,
                                      const NodeLayout& layout,
                                      const Eigen::VectorXd& mu, int n);

// (|mean| / ||Delta||_2, variance / ||Delta||_2^2) with Delta = omega_tilde -
// omega; both ratios stay bounded as Delta -> 0. Delta = 0 returns (0, 0).
std::pair<double, double> spectral_norm_bound(const SymMatrix& omega,
                                              const SymMatrix& omega_tilde,
                                              int node, const NodeLayout& layout,
                                              const Eigen::VectorXd& mu, int n);

}  // namespace nf
