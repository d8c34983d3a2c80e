#include "netfilter/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netfilter/errors.hpp"
#include "netfilter/numcore.hpp"
#include "netfilter/util.hpp"

namespace nf {

PenaltyWeights PenaltyWeights::uniform(int p) {
  if (p < 1) throw InvalidConfig("weights need at least one node");
  PenaltyWeights w;
  w.w = Eigen::MatrixXd::Ones(p, p);
  return w;
}

SymMatrix sample_covariance(const Dataset& d) {
  const int n = d.n();
  if (n < 2) throw TooFewSamples("covariance needs at least two samples");
  const Eigen::RowVectorXd mean = d.samples.colwise().mean();
  const Eigen::MatrixXd centered = d.samples.rowwise() - mean;
  return SymMatrix((centered.transpose() * centered) / static_cast<double>(n));
}

Eigen::MatrixXd soft_threshold_block(const Eigen::MatrixXd& b, double threshold) {
  if (threshold < 0.0) throw InvalidLambda("threshold must be nonnegative");
  const double norm = b.norm();
  if (norm <= threshold) return Eigen::MatrixXd::Zero(b.rows(), b.cols());
  return b * (1.0 - threshold / norm);
}

namespace {

void check_weights(const PenaltyWeights& weights, int p) {
  if (weights.w.rows() != p || weights.w.cols() != p)
    throw DimensionMismatch("weight matrix must be p x p");
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      if (!(weights.w(a, b) > 0.0) || !std::isfinite(weights.w(a, b)))
        throw InvalidConfig("penalty weights must be positive and finite");
}

double block_penalty(const Eigen::MatrixXd& omega, const NodeLayout& layout,
                     double lambda, const PenaltyWeights& weights) {
  const int p = layout.p, k = layout.k;
  double acc = 0.0;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      if (a == b) continue;
      acc += omega.block(a * k, b * k, k, k).norm() / weights.w(a, b);
    }
  return lambda * acc;
}

// Group soft-threshold of every off-diagonal block of m (in place).
void prox_offdiag(Eigen::MatrixXd& m, const NodeLayout& layout, double lambda_step,
                  const PenaltyWeights& weights) {
  const int p = layout.p, k = layout.k;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      if (a == b) continue;
      auto blk = m.block(a * k, b * k, k, k);
      const double norm = blk.norm();
      const double threshold = lambda_step / weights.w(a, b);
      if (norm <= threshold)
        blk.setZero();
      else
        blk *= (1.0 - threshold / norm);
    }
}

std::vector<std::pair<int, int>> extract_edges(const Eigen::MatrixXd& omega,
                                               const NodeLayout& layout) {
  constexpr double kEdgeNorm = 1e-8;
  const int p = layout.p, k = layout.k;
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      if (omega.block(a * k, b * k, k, k).norm() > kEdgeNorm) edges.emplace_back(a, b);
  return edges;
}

}  // namespace

EstimationResult block_glasso(const SymMatrix& s, const NodeLayout& layout,
                              double lambda, const PenaltyWeights& weights,
                              const SolveOptions& opt, const SymMatrix* warm_start) {
  const int d = layout.dim();
  if (s.dim() != d) throw DimensionMismatch("covariance does not match layout");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidLambda("lambda must be finite and nonnegative");
  if (opt.tol <= 0.0 || opt.max_iter < 1 || opt.initial_step <= 0.0 ||
      opt.backtrack <= 0.0 || opt.backtrack >= 1.0)
    throw InvalidConfig("bad solver options");
  check_weights(weights, layout.p);

  Eigen::MatrixXd omega;
  if (warm_start) {
    if (warm_start->dim() != d) throw DimensionMismatch("warm start dimension");
    omega = warm_start->mat();
  } else {
    omega = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
      omega(i, i) = 1.0 / std::max(s(i, i) + lambda, 1e-12);
  }

  Eigen::LLT<Eigen::MatrixXd> llt(omega);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("initial iterate not positive definite", 0);

  const auto objective = [&](const Eigen::MatrixXd& w,
                             const Eigen::LLT<Eigen::MatrixXd>& f) {
    const double logdet = 2.0 * f.matrixLLT().diagonal().array().log().sum();
    return (s.mat().cwiseProduct(w)).sum() - logdet +
           block_penalty(w, layout, lambda, weights);
  };

  EstimationResult result;
  result.layout = layout;
  result.lambda = lambda;

  double f_cur = objective(omega, llt);
  result.objective_trace.push_back(f_cur);
  double step = opt.initial_step;
  bool converged = false;
  int iter = 0;

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  while (iter < opt.max_iter && !converged) {
    const Eigen::MatrixXd inv = llt.solve(identity);
    const Eigen::MatrixXd grad = s.mat() - inv;

    step = std::min(opt.initial_step, step / opt.backtrack);
    bool accepted = false;
    while (step >= 1e-14) {
      Eigen::MatrixXd cand = omega - step * grad;
      cand = 0.5 * (cand + cand.transpose()).eval();
      prox_offdiag(cand, layout, step * lambda, weights);
      Eigen::LLT<Eigen::MatrixXd> cand_llt(cand);
      if (cand_llt.info() == Eigen::Success) {
        const double f_cand = objective(cand, cand_llt);
        if (f_cand <= f_cur && std::isfinite(f_cand)) {
          const double rel = std::abs(f_cur - f_cand) / (1.0 + std::abs(f_cur));
          omega = std::move(cand);
          llt = std::move(cand_llt);
          f_cur = f_cand;
          result.objective_trace.push_back(f_cur);
          accepted = true;
          ++iter;
          if (rel < opt.tol) converged = true;
          break;
        }
      }
      step *= opt.backtrack;
    }
    if (!accepted) {
      // No positive-definite descent step exists at machine precision: the
      // iterate is a numerical optimum.
      converged = true;
    }
  }

  result.omega_hat = SymMatrix(omega);
  result.iterations = iter;
  result.converged = converged;
  result.edge_set = extract_edges(result.omega_hat.mat(), layout);
  return result;
}

double ebic(const EstimationResult& r, const SymMatrix& s, int n, double gamma) {
  if (n < 1) throw TooFewSamples("ebic needs n >= 1");
  if (gamma < 0.0) throw InvalidConfig("ebic gamma must be nonnegative");
  const int p = r.layout.p, k = r.layout.k;
  if (s.dim() != r.layout.dim()) throw DimensionMismatch("covariance dimension");
  const double fit = (s.mat().cwiseProduct(r.omega_hat.mat())).sum() -
                     spd_logdet(r.omega_hat);
  const double df = p * k * (k + 1) / 2.0 +
                    static_cast<double>(r.edge_set.size()) * k * k;
  return n * fit + df * std::log(static_cast<double>(n)) +
         4.0 * gamma * df * std::log(static_cast<double>(p));
}

PathResult lambda_path(const SymMatrix& s, const NodeLayout& layout,
                       const PenaltyWeights& weights, int n_lambda, int n,
                       double gamma, const SolveOptions& opt) {
  if (n_lambda < 2) throw InvalidConfig("lambda path needs at least two points");
  check_weights(weights, layout.p);
  const int p = layout.p, k = layout.k;
  if (s.dim() != layout.dim()) throw DimensionMismatch("covariance dimension");

  double lambda_max = 0.0;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      if (a == b) continue;
      lambda_max = std::max(
          lambda_max, weights.w(a, b) * s.mat().block(a * k, b * k, k, k).norm());
    }
  if (!(lambda_max > 0.0)) lambda_max = 1e-12;  // degenerate block-diagonal S

  PathResult out;
  out.lambda_max = lambda_max;
  out.lambdas.resize(n_lambda);
  for (int i = 0; i < n_lambda; ++i)
    out.lambdas[i] = lambda_max * std::pow(0.01, static_cast<double>(i) /
                                                     (n_lambda - 1));

  const SymMatrix* warm = nullptr;
  for (int i = 0; i < n_lambda; ++i) {
    out.path.push_back(block_glasso(s, layout, out.lambdas[i], weights, opt, warm));
    warm = &out.path.back().omega_hat;
    out.ebics.push_back(ebic(out.path.back(), s, n, gamma));
  }
  out.best_index = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_lambda; ++i) {
    if (!out.path[i].converged) continue;
    if (out.ebics[i] < best) {
      best = out.ebics[i];
      out.best_index = i;
    }
  }
  return out;
}

}  // namespace nf
