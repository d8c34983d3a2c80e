#include "netfilter/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "netfilter/filtertest.hpp"
#include "netfilter/numcore.hpp"
#include "netfilter/rng.hpp"
#include "netfilter/seqtest.hpp"
#include "netfilter/util.hpp"

namespace nf {

std::string method_name(MethodId m) {
  switch (m) {
    case MethodId::MultiNf: return "multi_nf";
    case MethodId::SingleNf: return "single_nf";
    case MethodId::SeparatedNf: return "separated_nf";
    case MethodId::SeqMultiNf: return "seq_multi_nf";
    case MethodId::Hotelling: return "hotelling";
    case MethodId::Ttest: return "ttest";
  }
  throw InvalidConfig("unknown method id");
}

MethodId method_from_name(const std::string& name) {
  if (name == "multi_nf") return MethodId::MultiNf;
  if (name == "single_nf") return MethodId::SingleNf;
  if (name == "separated_nf") return MethodId::SeparatedNf;
  if (name == "seq_multi_nf") return MethodId::SeqMultiNf;
  if (name == "hotelling") return MethodId::Hotelling;
  if (name == "ttest") return MethodId::Ttest;
  throw InvalidConfig("unknown method name: " + name);
}

double hotelling_t2(const Dataset& case_d, const Dataset& control_d, int node) {
  if (case_d.layout.dim() != control_d.layout.dim() ||
      case_d.layout.k != control_d.layout.k)
    throw DimensionMismatch("case and control layouts differ");
  case_d.layout.check_node(node);
  const int n1 = case_d.n(), n2 = control_d.n();
  if (n1 < 2 || n2 < 2) throw TooFewSamples("hotelling needs two samples per group");
  const int k = case_d.layout.k;

  const auto cols = case_d.layout.node_indices(node);
  Eigen::MatrixXd x1(n1, k), x2(n2, k);
  for (int a = 0; a < k; ++a) {
    x1.col(a) = case_d.samples.col(cols[a]);
    x2.col(a) = control_d.samples.col(cols[a]);
  }
  const Eigen::RowVectorXd m1 = x1.colwise().mean();
  const Eigen::RowVectorXd m2 = x2.colwise().mean();
  const Eigen::MatrixXd c1 = x1.rowwise() - m1;
  const Eigen::MatrixXd c2 = x2.rowwise() - m2;
  const Eigen::MatrixXd pooled =
      (c1.transpose() * c1 + c2.transpose() * c2) / static_cast<double>(n1 + n2 - 2);
  Eigen::LLT<Eigen::MatrixXd> llt(pooled);
  if (llt.info() != Eigen::Success)
    throw SingularBlock("pooled covariance is singular");
  const Eigen::VectorXd diff = (m1 - m2).transpose();
  const double t2 = static_cast<double>(n1) * n2 / (n1 + n2) *
                    diff.dot(llt.solve(diff));
  if (!std::isfinite(t2)) throw SingularBlock("pooled covariance is singular");
  return t2;
}

double ttest_statistic(const Dataset& case_d, const Dataset& control_d, int flat) {
  if (flat < 0 || flat >= case_d.layout.dim())
    throw IndexOutOfRange("attribute index out of range");
  const int n1 = case_d.n(), n2 = control_d.n();
  if (n1 < 2 || n2 < 2) throw TooFewSamples("t-test needs two samples per group");
  const double m1 = case_d.samples.col(flat).mean();
  const double m2 = control_d.samples.col(flat).mean();
  const double ss1 = (case_d.samples.col(flat).array() - m1).square().sum();
  const double ss2 = (control_d.samples.col(flat).array() - m2).square().sum();
  const double sp2 = (ss1 + ss2) / (n1 + n2 - 2);
  if (!(sp2 > 0.0)) throw ZeroVariance("pooled variance is zero");
  return (m1 - m2) / std::sqrt(sp2 * (1.0 / n1 + 1.0 / n2));
}

namespace {

// 1-based positions from statistics, descending; ties broken by index.
std::vector<int> positions_desc(const std::vector<double>& stat) {
  const int m = static_cast<int>(stat.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (stat[a] != stat[b]) return stat[a] > stat[b];
    return a < b;
  });
  std::vector<int> pos(m);
  for (int r = 0; r < m; ++r) pos[order[r]] = r + 1;
  return pos;
}

}  // namespace

SymMatrix separated_precision(const Dataset& control_d, int n_lambda, double gamma,
                              const SolveOptions& opt) {
  const int p = control_d.layout.p, k = control_d.layout.k;
  if (k < 2)
    throw InvalidConfig("separated estimation needs at least two attribute types");
  const int d = p * k;
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(d, d);
  const NodeLayout single = make_layout(p, 1);
  const PenaltyWeights w = PenaltyWeights::uniform(p);
  for (int a = 0; a < k; ++a) {
    const Dataset view = select_attribute(control_d, a);
    const PathResult path = lambda_path(sample_covariance(view), single, w,
                                        n_lambda, view.n(), gamma, opt);
    if (path.best_index < 0)
      throw NumericError("per-type estimation produced no converged fit");
    const Eigen::MatrixXd& oa = path.path[path.best_index].omega_hat.mat();
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) omega(i * k + a, j * k + a) = oa(i, j);
  }
  return SymMatrix(std::move(omega));
}

SeparatedRank separated_nf_rank(const Dataset& case_d, const SymMatrix& omega_sep) {
  const int k = case_d.layout.k;
  if (k < 2)
    throw InvalidConfig("separated ranking needs at least two attribute types");
  const int d = case_d.layout.dim();
  const FilteredSummary fs = filter(case_d, omega_sep);

  SeparatedRank out;
  out.attr_stat.resize(d);
  for (int flat = 0; flat < d; ++flat)
    out.attr_stat[flat] = lrt_statistic(fs, {flat}).statistic;
  out.attr_position = positions_desc(out.attr_stat);
  out.node_rank.resize(case_d.layout.p);
  for (int node = 0; node < case_d.layout.p; ++node) {
    int worst = 0;
    for (int flat : case_d.layout.node_indices(node))
      worst = std::max(worst, out.attr_position[flat]);
    out.node_rank[node] = (worst + k - 1) / k;
  }
  return out;
}

SeparatedRank separated_nf_rank(const Dataset& case_d, const Dataset& control_d,
                                int n_lambda, double gamma, const SolveOptions& opt) {
  return separated_nf_rank(case_d,
                           separated_precision(control_d, n_lambda, gamma, opt));
}

RocCurve roc_and_auc(const std::vector<int>& ranks, int p) {
  if (p < 1) throw InvalidConfig("roc needs at least one node");
  if (ranks.empty()) throw InvalidConfig("roc needs at least one replicate");
  for (int r : ranks)
    if (r < 1 || r > p) throw IndexOutOfRange("rank outside 1..p");
  RocCurve c;
  c.x.resize(p + 1);
  c.y.resize(p + 1);
  for (int k = 0; k <= p; ++k) {
    c.x[k] = static_cast<double>(k) / p;
    int hits = 0;
    for (int r : ranks)
      if (r <= k) ++hits;
    c.y[k] = static_cast<double>(hits) / ranks.size();
  }
  c.auc = 0.0;
  for (int k = 0; k < p; ++k)
    c.auc += 0.5 * (c.y[k] + c.y[k + 1]) * (c.x[k + 1] - c.x[k]);
  return c;
}

namespace {

struct NetworkOutcome {
  // ranks[m] holds this network's per-trial ranks for methods[m]; the joint
  // rank for multi-target studies.
  std::vector<std::vector<int>> ranks;
  int excluded = 0;
};

EvalReport finalize_report(const SimConfig& cfg, const std::vector<MethodId>& methods,
                           std::vector<NetworkOutcome>&& outcomes, int top_k,
                           int trials_per_network, double runtime,
                           std::vector<std::uint64_t>&& seeds) {
  EvalReport report;
  report.config = cfg;
  report.n_networks = static_cast<int>(outcomes.size());
  report.trials_per_network = trials_per_network;
  report.runtime_seconds = runtime;
  report.network_seeds = std::move(seeds);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    std::vector<int> all;
    for (const auto& o : outcomes)
      all.insert(all.end(), o.ranks[m].begin(), o.ranks[m].end());
    MethodMetrics mm;
    mm.method = methods[m];
    mm.n_trials = static_cast<int>(all.size());
    if (!all.empty()) {
      mm.roc = roc_and_auc(all, cfg.p);
      mm.auc = mm.roc.auc;
      int hits = 0;
      for (int r : all)
        if (r <= top_k) ++hits;
      mm.top_prob = static_cast<double>(hits) / all.size();
    }
    report.per_method.push_back(std::move(mm));
  }
  for (const auto& o : outcomes) report.excluded += o.excluded;
  return report;
}

void check_config(const SimConfig& cfg) {
  if (cfg.n < 2) throw TooFewSamples("study needs n >= 2 per condition");
  if (cfg.k < 1 || cfg.p < 2) throw InvalidConfig("study needs p >= 2, k >= 1");
  if (cfg.snr < 0.0 || cfg.snr_secondary < 0.0)
    throw InvalidConfig("snr must be nonnegative");
  if (cfg.single_attr < 0 || cfg.single_attr >= cfg.k)
    throw InvalidConfig("single-attribute index out of range");
}

}  // namespace

EvalReport run_single_target_study(const SimConfig& cfg,
                                   const std::vector<MethodId>& methods,
                                   int n_networks, int threads) {
  check_config(cfg);
  if (n_networks < 1) throw InvalidConfig("need at least one network");
  if (methods.empty()) throw InvalidConfig("no methods requested");
  bool needs_multi = false, needs_single = false, needs_sep = false;
  for (MethodId m : methods) {
    if (m == MethodId::SeqMultiNf)
      throw InvalidConfig("sequential method applies to multi-target studies");
    needs_multi |= m == MethodId::MultiNf;
    needs_single |= m == MethodId::SingleNf;
    needs_sep |= m == MethodId::SeparatedNf;
  }
  if (needs_sep && cfg.k < 2)
    throw InvalidConfig("separated method needs at least two attribute types");

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::uint64_t> seeds(n_networks);
  for (int r = 0; r < n_networks; ++r) seeds[r] = derive_seed(cfg.seed, r);

  std::vector<NetworkOutcome> outcomes(n_networks);
  const NodeLayout multi_layout = make_layout(cfg.p, cfg.k);
  const NodeLayout single_layout = make_layout(cfg.p, 1);
  const PenaltyWeights w = PenaltyWeights::uniform(cfg.p);

  parallel_for(n_networks, threads, [&](int r) {
    NetworkOutcome& out = outcomes[r];
    out.ranks.resize(methods.size());
    const std::uint64_t net_seed = seeds[r];

    const Graph g = sbm_graph(cfg.p, cfg.blocks, cfg.theta_within,
                              cfg.theta_across, derive_seed(net_seed, 0));
    const TruePrecision tp = build_precision(g, cfg.k, cfg.rho_in, cfg.rho_out);
    const Dataset controls =
        sample(tp, std::nullopt, cfg.n, derive_seed(net_seed, 1), Condition::Control);

    // One estimate per network, reused across all perturbation trials.
    bool have_multi = false, have_single = false, have_sep = false;
    SymMatrix omega_multi, omega_single, omega_sep;
    if (needs_multi) {
      const PathResult path =
          lambda_path(sample_covariance(controls), multi_layout, w, cfg.n_lambda,
                      cfg.n, cfg.gamma, cfg.solve);
      if (path.best_index >= 0) {
        omega_multi = path.path[path.best_index].omega_hat;
        have_multi = true;
      }
    }
    Dataset controls_single;
    if (needs_single) {
      controls_single = select_attribute(controls, cfg.single_attr);
      const PathResult path =
          lambda_path(sample_covariance(controls_single), single_layout, w,
                      cfg.n_lambda, cfg.n, cfg.gamma, cfg.solve);
      if (path.best_index >= 0) {
        omega_single = path.path[path.best_index].omega_hat;
        have_single = true;
      }
    }
    if (needs_sep) {
      try {
        omega_sep = separated_precision(controls, cfg.n_lambda, cfg.gamma, cfg.solve);
        have_sep = true;
      } catch (const NumericError&) {
      }
    }

    for (int site = 0; site < cfg.p; ++site) {
      const PerturbationSpec mu = perturbation_from_snr(tp, {site}, {cfg.snr});
      const Dataset cases = sample(tp, mu, cfg.n, derive_seed(net_seed, 100 + site),
                                   Condition::Case);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        try {
          switch (methods[m]) {
            case MethodId::MultiNf: {
              if (!have_multi) { ++out.excluded; break; }
              const auto ranked = rank_nodes(filter(cases, omega_multi));
              for (const auto& lr : ranked)
                if (lr.node == site) out.ranks[m].push_back(lr.rank);
              break;
            }
            case MethodId::SingleNf: {
              if (!have_single) { ++out.excluded; break; }
              const Dataset view = select_attribute(cases, cfg.single_attr);
              const auto ranked = rank_nodes(filter(view, omega_single));
              for (const auto& lr : ranked)
                if (lr.node == site) out.ranks[m].push_back(lr.rank);
              break;
            }
            case MethodId::SeparatedNf: {
              if (!have_sep) { ++out.excluded; break; }
              const SeparatedRank sr = separated_nf_rank(cases, omega_sep);
              out.ranks[m].push_back(sr.node_rank[site]);
              break;
            }
            case MethodId::Hotelling: {
              std::vector<double> stat(cfg.p);
              for (int j = 0; j < cfg.p; ++j)
                stat[j] = hotelling_t2(cases, controls, j);
              out.ranks[m].push_back(positions_desc(stat)[site]);
              break;
            }
            case MethodId::Ttest: {
              std::vector<double> stat(cfg.p);
              for (int j = 0; j < cfg.p; ++j)
                stat[j] = std::abs(ttest_statistic(
                    cases, controls, multi_layout.flat(j, cfg.single_attr)));
              out.ranks[m].push_back(positions_desc(stat)[site]);
              break;
            }
            case MethodId::SeqMultiNf:
              break;  // rejected above
          }
        } catch (const NumericError&) {
          ++out.excluded;
        }
      }
    }
    if (log_enabled(1))
      log_debug("single-target network " + std::to_string(r + 1) + "/" +
                std::to_string(n_networks) + " done");
  });

  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
  return finalize_report(cfg, methods, std::move(outcomes), 1, cfg.p, secs,
                         std::move(seeds));
}

EvalReport run_multi_target_study(const SimConfig& cfg,
                                  const std::vector<MethodId>& methods,
                                  int n_networks, int pairs_per_network,
                                  int threads) {
  check_config(cfg);
  if (n_networks < 1) throw InvalidConfig("need at least one network");
  if (pairs_per_network < 1) throw InvalidConfig("need at least one pair per network");
  if (cfg.blocks.size() < 2)
    throw InvalidConfig("multi-target study needs at least two blocks");
  bool needs_multi = false;
  for (MethodId m : methods) {
    if (m != MethodId::MultiNf && m != MethodId::SeqMultiNf &&
        m != MethodId::Hotelling)
      throw InvalidConfig("multi-target study supports multi_nf, seq_multi_nf, hotelling");
    needs_multi |= m == MethodId::MultiNf || m == MethodId::SeqMultiNf;
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::uint64_t> seeds(n_networks);
  for (int r = 0; r < n_networks; ++r) seeds[r] = derive_seed(cfg.seed, r);

  std::vector<NetworkOutcome> outcomes(n_networks);
  const NodeLayout multi_layout = make_layout(cfg.p, cfg.k);
  const PenaltyWeights w = PenaltyWeights::uniform(cfg.p);

  parallel_for(n_networks, threads, [&](int r) {
    NetworkOutcome& out = outcomes[r];
    out.ranks.resize(methods.size());
    const std::uint64_t net_seed = seeds[r];

    const Graph g = sbm_graph(cfg.p, cfg.blocks, cfg.theta_within,
                              cfg.theta_across, derive_seed(net_seed, 0));
    const TruePrecision tp = build_precision(g, cfg.k, cfg.rho_in, cfg.rho_out);
    const Dataset controls =
        sample(tp, std::nullopt, cfg.n, derive_seed(net_seed, 1), Condition::Control);

    bool have_multi = false;
    SymMatrix omega_multi;
    if (needs_multi) {
      const PathResult path =
          lambda_path(sample_covariance(controls), multi_layout, w, cfg.n_lambda,
                      cfg.n, cfg.gamma, cfg.solve);
      if (path.best_index >= 0) {
        omega_multi = path.path[path.best_index].omega_hat;
        have_multi = true;
      }
    }

    std::vector<int> block0, block1;
    for (int i = 0; i < cfg.p; ++i)
      (g.block_of[i] == 0 ? block0 : block1).push_back(i);

    for (int q = 0; q < pairs_per_network; ++q) {
      NormalSampler pick(derive_seed(net_seed, 200 + q));
      const int site0 = block0[pick.uniform_int(block0.size())];
      const int site1 = block1[pick.uniform_int(block1.size())];
      const PerturbationSpec mu = perturbation_from_snr(
          tp, {site0, site1}, {cfg.snr, cfg.snr_secondary});
      const Dataset cases = sample(tp, mu, cfg.n, derive_seed(net_seed, 300 + q),
                                   Condition::Case);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        try {
          std::vector<int> pos;
          switch (methods[m]) {
            case MethodId::MultiNf: {
              if (!have_multi) { ++out.excluded; break; }
              const auto ranked = rank_nodes(filter(cases, omega_multi));
              pos.resize(cfg.p);
              for (const auto& lr : ranked) pos[lr.node] = lr.rank;
              break;
            }
            case MethodId::SeqMultiNf: {
              if (!have_multi) { ++out.excluded; break; }
              const SequentialTrace trace =
                  sequential_rank(filter(cases, omega_multi), cfg.p, std::nullopt);
              const auto order = trace.selection_order();
              pos.assign(cfg.p, cfg.p);
              for (std::size_t s = 0; s < order.size(); ++s)
                pos[order[s]] = static_cast<int>(s) + 1;
              break;
            }
            case MethodId::Hotelling: {
              std::vector<double> stat(cfg.p);
              for (int j = 0; j < cfg.p; ++j)
                stat[j] = hotelling_t2(cases, controls, j);
              pos = positions_desc(stat);
              break;
            }
            default:
              break;
          }
          if (!pos.empty())
            out.ranks[m].push_back(std::max(pos[site0], pos[site1]));
        } catch (const NumericError&) {
          ++out.excluded;
        }
      }
    }
    if (log_enabled(1))
      log_debug("multi-target network " + std::to_string(r + 1) + "/" +
                std::to_string(n_networks) + " done");
  });

  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
  return finalize_report(cfg, methods, std::move(outcomes), 2, pairs_per_network,
                         secs, std::move(seeds));
}

CvReport cv_mse_rank(const Dataset& case_d, const Dataset& control_d, int folds,
                     int n_lambda, double gamma, const SolveOptions& opt,
                     std::uint64_t seed, bool zero_mu) {
  if (case_d.layout.dim() != control_d.layout.dim())
    throw DimensionMismatch("case and control layouts differ");
  if (folds < 2) throw InvalidConfig("cross-validation needs at least two folds");
  if (case_d.n() < folds || control_d.n() < folds)
    throw TooFewSamples("fewer samples than folds");

  const int p = case_d.layout.p, k = case_d.layout.k, d = case_d.layout.dim();
  const PenaltyWeights w = PenaltyWeights::uniform(p);

  // Seeded shuffles; fold f gets indices f, f+folds, ... of the shuffle.
  const auto fold_of = [&](int n, std::uint64_t s) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    NormalSampler rng(s);
    for (int i = n - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.uniform_int(i + 1)]);
    std::vector<int> fold(n);
    for (int i = 0; i < n; ++i) fold[idx[i]] = i % folds;
    return fold;
  };
  const auto case_fold = fold_of(case_d.n(), derive_seed(seed, 0));
  const auto control_fold = fold_of(control_d.n(), derive_seed(seed, 1));

  const auto rows_where = [](const Dataset& src, const std::vector<int>& fold,
                             int f, bool in_fold) {
    Dataset out;
    out.layout = src.layout;
    out.condition = src.condition;
    out.seed = src.seed;
    std::vector<int> rows;
    for (int i = 0; i < src.n(); ++i)
      if ((fold[i] == f) == in_fold) rows.push_back(i);
    out.samples.resize(rows.size(), src.samples.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      out.samples.row(i) = src.samples.row(rows[i]);
    return out;
  };

  CvReport rep;
  rep.folds = folds;
  rep.fold_mse.assign(folds, std::vector<double>(p, 0.0));
  rep.mean_mse.assign(p, 0.0);
  double null_acc = 0.0;

  for (int f = 0; f < folds; ++f) {
    const Dataset train_control = rows_where(control_d, control_fold, f, false);
    const Dataset train_case = rows_where(case_d, case_fold, f, false);
    const Dataset test_case = rows_where(case_d, case_fold, f, true);
    if (train_control.n() < 2 || train_case.n() < 1 || test_case.n() < 1)
      throw TooFewSamples("a fold has too few samples");

    const PathResult path = lambda_path(sample_covariance(train_control),
                                        case_d.layout, w, n_lambda,
                                        train_control.n(), gamma, opt);
    if (path.best_index < 0)
      throw NumericError("estimation produced no converged fit in a fold");
    const SymMatrix& omega_f = path.path[path.best_index].omega_hat;
    const SymMatrix sigma_f = spd_inverse(omega_f);
    const FilteredSummary fs = filter(train_case, omega_f);

    null_acc += test_case.samples.array().square().rowwise().sum().mean();

    for (int node = 0; node < p; ++node) {
      Eigen::VectorXd pred = Eigen::VectorXd::Zero(d);
      if (!zero_mu) {
        const Eigen::VectorXd mu_hat = mu_mle(fs, case_d.layout.node_indices(node));
        pred = sigma_f.mat().middleCols(node * k, k) * mu_hat;
      }
      const Eigen::MatrixXd err = test_case.samples.rowwise() - pred.transpose();
      rep.fold_mse[f][node] = err.array().square().rowwise().sum().mean();
    }
  }

  for (int node = 0; node < p; ++node) {
    double acc = 0.0;
    for (int f = 0; f < folds; ++f) acc += rep.fold_mse[f][node];
    rep.mean_mse[node] = acc / folds;
  }
  rep.null_mse = null_acc / folds;

  // Ascending MSE; ties broken by node index.
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (rep.mean_mse[a] != rep.mean_mse[b]) return rep.mean_mse[a] < rep.mean_mse[b];
    return a < b;
  });
  rep.rank.assign(p, 0);
  for (int r = 0; r < p; ++r) rep.rank[order[r]] = r + 1;
  return rep;
}

}  // namespace nf
