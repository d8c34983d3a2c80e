#include "netfilter/filtertest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netfilter/numcore.hpp"
#include "netfilter/rng.hpp"

namespace nf {

namespace {

void check_group(const std::vector<int>& group, int dim) {
  if (group.empty()) throw InvalidConfig("attribute group is empty");
  for (int g : group)
    if (g < 0 || g >= dim) throw IndexOutOfRange("group index out of range");
  for (std::size_t i = 1; i < group.size(); ++i)
    if (group[i] == group[i - 1])
      throw InvalidConfig("attribute group has duplicates");
}

std::vector<int> complement(const std::vector<int>& group, int dim) {
  std::vector<bool> in(dim, false);
  for (int g : group) in[g] = true;
  std::vector<int> rest;
  rest.reserve(dim - group.size());
  for (int i = 0; i < dim; ++i)
    if (!in[i]) rest.push_back(i);
  return rest;
}

// Solves Sigma_GG x = b, guarding against ill-conditioned blocks.
Eigen::VectorXd solve_block(const Eigen::MatrixXd& sgg, const Eigen::VectorXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(sgg);
  if (llt.info() != Eigen::Success)
    throw SingularBlock("covariance block is not positive definite");
  const Eigen::VectorXd x = llt.solve(b);
  const double cond_proxy = sgg.norm() * x.norm() / std::max(b.norm(), 1e-300);
  if (!x.allFinite() || cond_proxy > 1e12)
    throw SingularBlock("covariance block is numerically singular");
  return x;
}

}  // namespace

FilteredSummary filter(const Dataset& d, const SymMatrix& omega) {
  if (omega.dim() != d.layout.dim())
    throw DimensionMismatch("precision does not match data layout");
  if (d.n() < 1) throw TooFewSamples("filter needs at least one sample");
  FilteredSummary fs;
  fs.layout = d.layout;
  fs.n = d.n();
  fs.ybar = d.samples.colwise().mean().transpose();
  fs.omega = omega;
  fs.zbar = omega.mat() * fs.ybar;
  fs.sigma = spd_inverse(omega);
  return fs;
}

Eigen::VectorXd mu_mle(const FilteredSummary& fs, const std::vector<int>& group,
                       bool cross_check) {
  auto sorted = group;
  std::sort(sorted.begin(), sorted.end());
  check_group(sorted, fs.layout.dim());

  const Eigen::MatrixXd sgg = submatrix(fs.sigma, group, group);
  Eigen::VectorXd ybar_g(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) ybar_g[i] = fs.ybar[group[i]];
  const Eigen::VectorXd mu = solve_block(sgg, ybar_g);

  if (cross_check) {
    const auto rest = complement(sorted, fs.layout.dim());
    Eigen::VectorXd zbar_g(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) zbar_g[i] = fs.zbar[group[i]];
    Eigen::VectorXd alt = zbar_g;
    if (!rest.empty()) {
      const Eigen::MatrixXd sgr = submatrix(fs.sigma, group, rest);
      Eigen::VectorXd zbar_r(rest.size());
      for (std::size_t i = 0; i < rest.size(); ++i) zbar_r[i] = fs.zbar[rest[i]];
      alt += solve_block(sgg, Eigen::VectorXd(sgr * zbar_r));
    }
    const double scale = std::max(1.0, mu.norm());
    if ((alt - mu).norm() > 1e-8 * scale)
      throw NumericError("mean estimate forms disagree beyond 1e-8");
  }
  return mu;
}

LrtResult lrt_statistic(const FilteredSummary& fs, const std::vector<int>& group,
                        bool cross_check) {
  auto sorted = group;
  std::sort(sorted.begin(), sorted.end());
  check_group(sorted, fs.layout.dim());

  const Eigen::MatrixXd sgg = submatrix(fs.sigma, group, group);
  Eigen::VectorXd ybar_g(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) ybar_g[i] = fs.ybar[group[i]];
  const Eigen::VectorXd x = solve_block(sgg, ybar_g);
  double t = fs.n * ybar_g.dot(x);
  if (t < 0.0 && t > -1e-9) t = 0.0;

  if (cross_check) {
    // Full quadratic-difference form: n*(zbar' Sigma zbar -
    // zbar_r' (Sigma_rr - Sigma_rG Sigma_GG^{-1} Sigma_Gr) zbar_r).
    const auto rest = complement(sorted, fs.layout.dim());
    const double full = quadform(fs.zbar, fs.sigma);
    double rest_part = 0.0;
    if (!rest.empty()) {
      const Eigen::MatrixXd srr = submatrix(fs.sigma, rest, rest);
      const Eigen::MatrixXd srg = submatrix(fs.sigma, rest, group);
      Eigen::LLT<Eigen::MatrixXd> llt(sgg);
      if (llt.info() != Eigen::Success)
        throw SingularBlock("covariance block is not positive definite");
      const Eigen::MatrixXd cond = srr - srg * llt.solve(srg.transpose());
      Eigen::VectorXd zbar_r(rest.size());
      for (std::size_t i = 0; i < rest.size(); ++i) zbar_r[i] = fs.zbar[rest[i]];
      rest_part = zbar_r.dot(cond * zbar_r);
    }
    const double alt = fs.n * (full - rest_part);
    if (std::abs(alt - t) > 1e-8 * std::max(1.0, std::abs(t)))
      throw NumericError("test statistic forms disagree beyond 1e-8");
  }

  LrtResult r;
  r.group = group;
  r.statistic = t;
  r.df = static_cast<int>(group.size());
  r.p_raw = 1.0 - chisq_cdf(std::max(t, 0.0), r.df);
  r.mu_hat = x;
  return r;
}

std::vector<double> by_adjust(const std::vector<double>& p_raw) {
  const int m = static_cast<int>(p_raw.size());
  if (m == 0) return {};
  for (double p : p_raw)
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p-values must lie in [0,1]");
  double cm = 0.0;
  for (int i = 1; i <= m; ++i) cm += 1.0 / i;

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p_raw[a] < p_raw[b]; });

  std::vector<double> adj(m);
  double running = 1.0;
  for (int r = m - 1; r >= 0; --r) {
    const double value = p_raw[order[r]] * m * cm / (r + 1);
    running = std::min(running, value);
    adj[order[r]] = std::min(1.0, running);
  }
  return adj;
}

std::vector<LrtResult> rank_nodes(const FilteredSummary& fs, bool cross_check) {
  const int p = fs.layout.p;
  std::vector<LrtResult> results;
  results.reserve(p);
  for (int node = 0; node < p; ++node) {
    LrtResult r = lrt_statistic(fs, fs.layout.node_indices(node), cross_check);
    r.node = node;
    results.push_back(std::move(r));
  }
  std::vector<double> p_raw(p);
  for (int i = 0; i < p; ++i) p_raw[i] = results[i].p_raw;
  const auto adj = by_adjust(p_raw);
  for (int i = 0; i < p; ++i) results[i].p_adjusted = adj[i];

  std::sort(results.begin(), results.end(), [](const LrtResult& a, const LrtResult& b) {
    if (a.statistic != b.statistic) return a.statistic > b.statistic;
    return a.node < b.node;
  });
  for (int i = 0; i < p; ++i) results[i].rank = i + 1;
  return results;
}

DominanceReport stochastic_dominance_check(const TruePrecision& tp,
                                           const PerturbationSpec& mu, int n_reps,
                                           int n, std::uint64_t seed) {
  if (mu.perturbed_nodes.size() != 1)
    throw InvalidConfig("dominance check expects exactly one perturbed node");
  if (n_reps < 1) throw InvalidConfig("dominance check needs replicates");
  const int p = tp.layout.p;
  const int pert = mu.perturbed_nodes[0];

  DominanceReport rep;
  rep.perturbed_node = pert;
  rep.n_reps = n_reps;
  rep.mean_statistic.assign(p, 0.0);
  rep.prob_perturbed_higher.assign(p, 0.0);
  rep.noncentrality.assign(p, 0.0);

  FilteredSummary fs;
  fs.layout = tp.layout;
  fs.n = n;
  fs.omega = tp.omega;
  fs.sigma = spd_inverse(tp.omega);

  const Eigen::VectorXd m = fs.sigma.mat() * mu.mu;
  for (int j = 0; j < p; ++j) {
    const auto idx = tp.layout.node_indices(j);
    const Eigen::MatrixXd sjj = submatrix(fs.sigma, idx, idx);
    Eigen::VectorXd mj(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) mj[a] = m[idx[a]];
    rep.noncentrality[j] = n * mj.dot(solve_block(sjj, mj));
  }

  std::vector<double> t(p);
  for (int it = 0; it < n_reps; ++it) {
    const Dataset d = sample(tp, mu, n, derive_seed(seed, it), Condition::Case);
    fs.ybar = d.samples.colwise().mean().transpose();
    fs.zbar = fs.omega.mat() * fs.ybar;
    for (int j = 0; j < p; ++j) {
      t[j] = lrt_statistic(fs, tp.layout.node_indices(j)).statistic;
      rep.mean_statistic[j] += t[j];
    }
    for (int j = 0; j < p; ++j)
      if (t[pert] > t[j]) rep.prob_perturbed_higher[j] += 1.0;
  }
  for (int j = 0; j < p; ++j) {
    rep.mean_statistic[j] /= n_reps;
    rep.prob_perturbed_higher[j] /= n_reps;
  }
  rep.dominates = true;
  for (int j = 0; j < p; ++j)
    if (j != pert && rep.mean_statistic[pert] <= rep.mean_statistic[j])
      rep.dominates = false;
  return rep;
}

}  // namespace nf
