#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "netfilter/layout.hpp"
#include "netfilter/netmodel.hpp"
#include "netfilter/sym_matrix.hpp"

namespace nf {

// Positive symmetric p x p penalty weights; the penalty on block (a,b) is
// lambda / w(a,b), so larger weights mean weaker shrinkage.
struct PenaltyWeights {
  Eigen::MatrixXd w;

  static PenaltyWeights uniform(int p);
};

struct SolveOptions {
  double tol = 1e-6;        // relative objective change
  int max_iter = 500;
  double initial_step = 1.0;
  double backtrack = 0.5;
};

struct EstimationResult {
  NodeLayout layout;
  SymMatrix omega_hat;
  double lambda = 0.0;
  std::vector<double> objective_trace;        // accepted iterates, monotone
  std::vector<std::pair<int, int>> edge_set;  // a < b, block norm > 1e-8
  int iterations = 0;
  bool converged = false;
};

// Mean-centered sample covariance with 1/n normalization (MLE convention).
SymMatrix sample_covariance(const Dataset& d);

// Group soft-thresholding of one block: 0 if ||b||_F <= threshold, otherwise
// b scaled by (1 - threshold/||b||_F). Exposed for direct testing.
Eigen::MatrixXd soft_threshold_block(const Eigen::MatrixXd& b, double threshold);

// Penalized precision estimate: minimizes
//   tr(S W) - log|W| + lambda * sum_{a != b} ||W_ab||_F / w_ab
// over positive definite W by proximal gradient with backtracking. Diagonal
// blocks are never penalized. Optional warm start.
EstimationResult block_glasso(const SymMatrix& s, const NodeLayout& layout,
                              double lambda, const PenaltyWeights& weights,
                              const SolveOptions& opt = {},
                              const SymMatrix* warm_start = nullptr);

// Extended BIC of a fitted precision: n*(tr(S W) - log|W|) + df*log(n) +
// 4*gamma*df*log(p) with df = p*k(k+1)/2 + |E|*k^2.
double ebic(const EstimationResult& r, const SymMatrix& s, int n, double gamma);

struct PathResult {
  std::vector<double> lambdas;         // descending, log-spaced
  std::vector<EstimationResult> path;  // parallel to lambdas
  std::vector<double> ebics;
  int best_index = -1;                 // EBIC minimizer among converged fits
  double lambda_max = 0.0;
};

// Warm-started solve over a log-spaced grid from lambda_max (smallest lambda
// with no selected edges) down to lambda_max/100; selects by EBIC.
PathResult lambda_path(const SymMatrix& s, const NodeLayout& layout,
                       const PenaltyWeights& weights, int n_lambda, int n,
                       double gamma, const SolveOptions& opt = {});

}  // namespace nf
