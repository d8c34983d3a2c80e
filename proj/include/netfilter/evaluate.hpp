#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netfilter/estimate.hpp"
#include "netfilter/netmodel.hpp"

namespace nf {

enum class MethodId { MultiNf, SingleNf, SeparatedNf, SeqMultiNf, Hotelling, Ttest };

std::string method_name(MethodId m);
MethodId method_from_name(const std::string& name);

// Two-sample Hotelling T^2 on one node's attribute vector, pooled covariance.
double hotelling_t2(const Dataset& case_d, const Dataset& control_d, int node);

// Pooled two-sample t statistic on one flat attribute index.
double ttest_statistic(const Dataset& case_d, const Dataset& control_d, int flat);

struct SeparatedRank {
  std::vector<double> attr_stat;   // per flat attribute
  std::vector<int> attr_position; // 1-based position in the joint ranking
  std::vector<int> node_rank;      // ceil(worst attribute position / k)
};

// Block precision assembled from per-attribute-type estimates with zero
// cross-type blocks. Throws NumericError when any per-type path has no
// converged fit.
SymMatrix separated_precision(const Dataset& control_d, int n_lambda,
                              double gamma, const SolveOptions& opt = {});

// Attributes ranked jointly by their single-attribute statistics under an
// assembled cross-type-zero precision. A node counts as found at level r iff
// all its attributes sit in the top r*k positions.
SeparatedRank separated_nf_rank(const Dataset& case_d, const SymMatrix& omega_sep);
SeparatedRank separated_nf_rank(const Dataset& case_d, const Dataset& control_d,
                                int n_lambda, double gamma,
                                const SolveOptions& opt = {});

struct RocCurve {
  std::vector<double> x;  // k/p, k = 0..p
  std::vector<double> y;  // fraction of replicates with rank <= k
  double auc = 0.0;       // trapezoid
};

// Empirical CDF of true-site ranks on the grid k = 0..p.
RocCurve roc_and_auc(const std::vector<int>& ranks, int p);

struct SimConfig {
  int p = 20;
  int k = 2;
  std::vector<int> blocks{10, 10};
  double theta_within = 0.4;
  double theta_across = 0.2;
  double rho_in = 0.8;
  double rho_out = 0.2;
  double snr = 0.2;
  double snr_secondary = 0.1;  // multi-target second site
  int n = 50;                  // per condition
  int n_lambda = 30;
  double gamma = 0.5;
  int single_attr = 0;         // attribute used by single-attribute methods
  SolveOptions solve;
  std::uint64_t seed = 1;
};

struct MethodMetrics {
  MethodId method = MethodId::MultiNf;
  double top_prob = 0.0;  // rank 1 (single target) / both in top 2 (multi)
  double auc = 0.0;
  RocCurve roc;
  int n_trials = 0;
};

struct EvalReport {
  SimConfig config;
  std::vector<MethodMetrics> per_method;
  int n_networks = 0;
  int trials_per_network = 0;
  int excluded = 0;  // trials dropped (estimation did not converge)
  double runtime_seconds = 0.0;
  std::vector<std::uint64_t> network_seeds;
};

// Single perturbed site: every node of every network is perturbed in turn;
// each method ranks the site and the report aggregates rank-1 probability
// and ROC/AUC over all (network, site) trials.
EvalReport run_single_target_study(const SimConfig& cfg,
                                   const std::vector<MethodId>& methods,
                                   int n_networks, int threads = 1);

// Two perturbed sites (one per block, snr and snr_secondary);
// pairs_per_network seeded draws per network. Metrics are joint: both sites
// in the top 2, and the both-in-top-k curve.
EvalReport run_multi_target_study(const SimConfig& cfg,
                                  const std::vector<MethodId>& methods,
                                  int n_networks, int pairs_per_network,
                                  int threads = 1);

struct CvReport {
  std::vector<double> mean_mse;               // per node, over folds
  std::vector<std::vector<double>> fold_mse;  // [fold][node]
  double null_mse = 0.0;                      // zero-prediction baseline
  std::vector<int> rank;                      // 1-based, ascending mean MSE
  int folds = 0;
};

// K-fold single-site localization: per fold, the network is re-estimated on
// training controls, each candidate node's mean is fit on training cases, and
// the held-out cases score the propagated prediction Sigma_hat * mu_hat(node).
CvReport cv_mse_rank(const Dataset& case_d, const Dataset& control_d, int folds,
                     int n_lambda, double gamma, const SolveOptions& opt,
                     std::uint64_t seed, bool zero_mu = false);

}  // namespace nf
