#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "netfilter/layout.hpp"
#include "netfilter/netmodel.hpp"
#include "netfilter/sym_matrix.hpp"

namespace nf {

// Sufficient statistics of network-filtered case data: zbar = omega * ybar
// has distribution N(mu, omega/n) under the model, so tests below need only
// the means, the precision and its inverse.
struct FilteredSummary {
  NodeLayout layout;
  int n = 0;
  Eigen::VectorXd ybar;  // raw sample mean
  Eigen::VectorXd zbar;  // filtered mean, omega * ybar
  SymMatrix omega;
  SymMatrix sigma;       // omega^{-1}
};

FilteredSummary filter(const Dataset& d, const SymMatrix& omega);

// Restricted MLE of the mean over an attribute group G (mu zero elsewhere):
// (Sigma_GG)^{-1} ybar_G. With cross_check, also evaluated in the
// zbar_G + Sigma_GG^{-1} Sigma_{G,rest} zbar_rest form; the two must agree
// to 1e-8.
Eigen::VectorXd mu_mle(const FilteredSummary& fs, const std::vector<int>& group,
                       bool cross_check = false);

struct LrtResult {
  int node = -1;  // -1 for ad-hoc groups
  std::vector<int> group;
  double statistic = 0.0;
  int df = 0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  int rank = 0;
  Eigen::VectorXd mu_hat;
};

// Likelihood-ratio statistic for mean perturbation on an attribute group:
// T = n * ybar_G^T (Sigma_GG)^{-1} ybar_G, chi-square with |G| df under the
// null. cross_check evaluates the full quadratic-difference form as well and
// requires relative agreement 1e-8.
LrtResult lrt_statistic(const FilteredSummary& fs, const std::vector<int>& group,
                        bool cross_check = false);

// Per-node tests, ranked by statistic (descending; ties broken by node
// index). p_adjusted is Benjamini-Yekutieli across the p nodes.
std::vector<LrtResult> rank_nodes(const FilteredSummary& fs, bool cross_check = false);

// Benjamini-Yekutieli step-up adjustment (dependence-robust FDR).
std::vector<double> by_adjust(const std::vector<double>& p_raw);

struct DominanceReport {
  int perturbed_node = -1;
  std::vector<double> mean_statistic;         // per node
  std::vector<double> prob_perturbed_higher;  // P(T_perturbed > T_j)
  std::vector<double> noncentrality;          // n-scaled, per node
  bool dominates = false;                     // perturbed mean largest
  int n_reps = 0;
};

// Monte Carlo check that the statistic at the true perturbation site
// stochastically dominates every other node's.
DominanceReport stochastic_dominance_check(const TruePrecision& tp,
                                           const PerturbationSpec& mu, int n_reps,
                                           int n, std::uint64_t seed);

}  // namespace nf
