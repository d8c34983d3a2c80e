#include "netfilter/seqtest.hpp"

#include <algorithm>
#include <cmath>

#include "netfilter/numcore.hpp"
#include "netfilter/rng.hpp"

namespace nf {

namespace {

std::vector<int> union_group(const NodeLayout& layout, const std::vector<int>& s_nodes,
                             int candidate) {
  std::vector<int> nodes = s_nodes;
  nodes.push_back(candidate);
  return layout.group_indices(nodes);
}

}  // namespace

double sequential_statistic(const FilteredSummary& fs,
                            const std::vector<int>& s_nodes, int candidate) {
  fs.layout.check_node(candidate);
  for (int s : s_nodes) {
    fs.layout.check_node(s);
    if (s == candidate)
      throw InvalidConfig("candidate already in the found set");
  }
  if (s_nodes.empty())
    return lrt_statistic(fs, fs.layout.node_indices(candidate)).statistic;
  const double t_joint =
      lrt_statistic(fs, union_group(fs.layout, s_nodes, candidate)).statistic;
  const double t_s = lrt_statistic(fs, fs.layout.group_indices(s_nodes)).statistic;
  return t_joint - t_s;
}

std::vector<int> SequentialTrace::selection_order() const {
  std::vector<int> order;
  for (const auto& step : steps)
    if (step.selected) order.push_back(*step.selected);
  return order;
}

SequentialTrace sequential_rank(const FilteredSummary& fs, int max_steps,
                                std::optional<double> alpha, bool pooled_adjust) {
  if (max_steps < 1) throw InvalidConfig("max_steps must be at least 1");
  if (alpha && (*alpha <= 0.0 || *alpha >= 1.0))
    throw InvalidConfig("alpha must lie in (0,1)");
  const int p = fs.layout.p;
  const int k = fs.layout.k;

  SequentialTrace trace;
  std::vector<int> found;
  std::vector<int> remaining(p);
  for (int i = 0; i < p; ++i) remaining[i] = i;

  for (int step_idx = 0; step_idx < max_steps; ++step_idx) {
    if (remaining.empty()) {
      trace.stop_reason = StopReason::Exhausted;
      return trace;
    }
    SequentialStep step;
    step.found_before = found;

    double t_s = 0.0;
    if (!found.empty())
      t_s = lrt_statistic(fs, fs.layout.group_indices(found)).statistic;

    for (int node : remaining) {
      SeqNodeStat st;
      st.node = node;
      const double t_joint =
          found.empty()
              ? lrt_statistic(fs, fs.layout.node_indices(node)).statistic
              : lrt_statistic(fs, union_group(fs.layout, found, node)).statistic;
      st.statistic_raw = t_joint - t_s;
      st.statistic = std::max(st.statistic_raw, 0.0);
      st.p_raw = 1.0 - chisq_cdf(st.statistic, k);
      step.stats.push_back(st);
    }

    if (!pooled_adjust) {
      std::vector<double> p_raw(step.stats.size());
      for (std::size_t i = 0; i < step.stats.size(); ++i) p_raw[i] = step.stats[i].p_raw;
      const auto adj = by_adjust(p_raw);
      for (std::size_t i = 0; i < step.stats.size(); ++i)
        step.stats[i].p_adjusted = adj[i];
    }

    std::sort(step.stats.begin(), step.stats.end(),
              [](const SeqNodeStat& a, const SeqNodeStat& b) {
                if (a.statistic != b.statistic) return a.statistic > b.statistic;
                return a.node < b.node;
              });

    if (step_idx == 0 && step.stats.size() > 1 &&
        step.stats[0].statistic < 2.0 * step.stats[1].statistic)
      trace.low_margin_warning = true;

    if (alpha && !pooled_adjust) {
      bool any = false;
      for (const auto& st : step.stats)
        if (st.p_adjusted < *alpha) any = true;
      if (!any) {
        trace.steps.push_back(std::move(step));
        trace.stop_reason = StopReason::NoSignificant;
        return trace;
      }
    }

    const int chosen = step.stats.front().node;
    step.selected = chosen;
    trace.steps.push_back(std::move(step));
    found.push_back(chosen);
    remaining.erase(std::remove(remaining.begin(), remaining.end(), chosen),
                    remaining.end());
  }
  trace.stop_reason = remaining.empty() ? StopReason::Exhausted : StopReason::MaxSteps;

  if (pooled_adjust) {
    std::vector<double> pooled;
    for (const auto& step : trace.steps)
      for (const auto& st : step.stats) pooled.push_back(st.p_raw);
    const auto adj = by_adjust(pooled);
    std::size_t idx = 0;
    for (auto& step : trace.steps)
      for (auto& st : step.stats) st.p_adjusted = adj[idx++];
  }
  return trace;
}

ExpectedGainReport expected_gain_check(const TruePrecision& tp,
                                       const PerturbationSpec& mu,
                                       const std::vector<int>& s_nodes,
                                       int candidate, int n_reps, int n,
                                       std::uint64_t seed) {
  if (n_reps < 2) throw InvalidConfig("gain check needs at least 2 replicates");
  for (int s : s_nodes)
    if (s == candidate)
      throw InvalidConfig("candidate already in the found set");
  const SymMatrix sigma = spd_inverse(tp.omega);
  const int d = tp.layout.dim();

  // Closed form: n * mu' [P_i + P_S - P_{i u S}] mu with
  // P_G = Sigma_{.,G} Sigma_GG^{-1} Sigma_{G,.}; each quadratic term is
  // v' Sigma_GG^{-1} v with v = Sigma_{G,.} mu.
  std::vector<int> all(d);
  for (int i = 0; i < d; ++i) all[i] = i;
  const auto quad = [&](const std::vector<int>& flat) {
    const Eigen::MatrixXd s_g_all = submatrix(sigma, flat, all);
    const Eigen::MatrixXd s_gg = submatrix(sigma, flat, flat);
    Eigen::LLT<Eigen::MatrixXd> llt(s_gg);
    if (llt.info() != Eigen::Success)
      throw SingularBlock("covariance block is not positive definite");
    const Eigen::VectorXd v = s_g_all * mu.mu;
    return v.dot(llt.solve(v));
  };

  const auto gi = tp.layout.node_indices(candidate);
  double closed = quad(gi);
  if (!s_nodes.empty()) {
    const auto gs = tp.layout.group_indices(s_nodes);
    closed += quad(gs);
    closed -= quad(union_group(tp.layout, s_nodes, candidate));
  } else {
    closed -= quad(gi);
  }
  closed *= n;

  FilteredSummary fs;
  fs.layout = tp.layout;
  fs.n = n;
  fs.omega = tp.omega;
  fs.sigma = sigma;

  double sum = 0.0, sumsq = 0.0;
  for (int it = 0; it < n_reps; ++it) {
    const Dataset data = sample(tp, mu, n, derive_seed(seed, it), Condition::Case);
    fs.ybar = data.samples.colwise().mean().transpose();
    fs.zbar = fs.omega.mat() * fs.ybar;
    const double t_i = lrt_statistic(fs, gi).statistic;
    const double t_adj = sequential_statistic(fs, s_nodes, candidate);
    const double diff = t_i - t_adj;
    sum += diff;
    sumsq += diff * diff;
  }
  ExpectedGainReport rep;
  rep.n_reps = n_reps;
  rep.closed_form = closed;
  rep.empirical_mean = sum / n_reps;
  const double var = std::max(0.0, (sumsq - sum * sum / n_reps) / (n_reps - 1));
  rep.mc_se = std::sqrt(var / n_reps);
  rep.abs_se_discrepancy = rep.mc_se > 0.0
                               ? std::abs(rep.empirical_mean - closed) / rep.mc_se
                               : std::abs(rep.empirical_mean - closed);
  return rep;
}

}  // namespace nf
