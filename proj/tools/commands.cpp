#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "netfilter/accuracy.hpp"
#include "netfilter/errors.hpp"
#include "netfilter/filtertest.hpp"
#include "netfilter/io.hpp"
#include "netfilter/seqtest.hpp"
#include "netfilter/util.hpp"
#include "netfilter/version.hpp"

namespace nfcli {
namespace {

using nlohmann::ordered_json;

std::string head(const Invocation& inv) {
  return std::string("netfilter ") + nf::kVersion + " | " + inv.text;
}

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw nf::InvalidConfig("--out directory must not be empty");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw nf::IoError("cannot create output directory: " + dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// JSON files start with a // comment carrying the same provenance line as the
// # comment on CSV/TSV files; strip it (or parse comment-tolerantly) to get
// plain JSON. The body repeats it under "invocation" for strict parsers.
void write_json_file(const std::string& path, const Invocation& inv,
                     const ordered_json& body) {
  std::ostringstream out;
  out << "// " << head(inv) << "\n" << body.dump(2) << "\n";
  nf::write_text_file(path, out.str());
}

std::vector<std::string> load_name_file(const std::string& path) {
  std::istringstream in(nf::read_text_file(path));
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    names.push_back(line);
  }
  return names;
}

nf::NodeLayout build_layout(int p, int k, const std::string& names_path) {
  if (p < 1) throw nf::InvalidConfig("--p must be at least 1");
  if (k < 1) throw nf::InvalidConfig("--k must be at least 1");
  std::vector<std::string> names;
  if (!names_path.empty()) {
    names = load_name_file(names_path);
    if (static_cast<int>(names.size()) != p)
      throw nf::InvalidConfig("--names file has " + std::to_string(names.size()) +
                              " names, expected " + std::to_string(p));
  }
  return nf::make_layout(p, k, std::move(names));
}

nf::Dataset load_dataset(const std::string& path, const nf::NodeLayout& layout,
                         nf::Condition cond) {
  const Eigen::MatrixXd m = nf::read_matrix_csv(path);
  if (m.cols() != layout.dim())
    throw nf::DimensionMismatch(path + ": has " + std::to_string(m.cols()) +
                                " columns, layout needs " +
                                std::to_string(layout.dim()));
  nf::Dataset d;
  d.layout = layout;
  d.samples = m;
  d.condition = cond;
  return d;
}

nf::SymMatrix load_square(const std::string& path, int dim) {
  const Eigen::MatrixXd m = nf::read_matrix_csv(path);
  if (m.rows() != dim || m.cols() != dim)
    throw nf::DimensionMismatch(path + ": expected a " + std::to_string(dim) +
                                "x" + std::to_string(dim) + " matrix, got " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  return nf::SymMatrix(m);
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nf::SolveOptions solve_options(double tol, int max_iter) {
  if (tol <= 0) throw nf::InvalidConfig("--tol must be positive");
  if (max_iter < 1) throw nf::InvalidConfig("--max-iter must be at least 1");
  nf::SolveOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  return opt;
}

std::string stop_reason_name(nf::StopReason r) {
  switch (r) {
    case nf::StopReason::MaxSteps: return "max_steps";
    case nf::StopReason::NoSignificant: return "no_significant";
    case nf::StopReason::Exhausted: return "exhausted";
  }
  throw nf::DomainError("unknown stop reason");
}

}  // namespace

int run_estimate(const EstimateArgs& a, const Invocation& inv) {
  const nf::NodeLayout layout = build_layout(a.p, a.k, a.names_path);
  const nf::Dataset controls =
      load_dataset(a.control_path, layout, nf::Condition::Control);
  nf::PenaltyWeights weights = nf::PenaltyWeights::uniform(a.p);
  if (!a.weights_path.empty()) {
    const nf::SymMatrix w = load_square(a.weights_path, a.p);
    if ((w.mat().array() <= 0).any())
      throw nf::InvalidConfig("--weights entries must be positive");
    weights.w = w.mat();
  }
  if (a.n_lambda < 1) throw nf::InvalidConfig("--lambdas must be at least 1");
  if (a.gamma < 0) throw nf::InvalidConfig("--gamma must be nonnegative");
  ensure_out_dir(a.out_dir);

  const nf::SymMatrix s = nf::sample_covariance(controls);
  const nf::PathResult path =
      nf::lambda_path(s, layout, weights, a.n_lambda, controls.n(), a.gamma,
                      solve_options(a.tol, a.max_iter));
  if (path.best_index < 0)
    throw nf::NumericError("no lambda on the grid produced a converged fit");
  const nf::EstimationResult& best = path.path[path.best_index];

  nf::write_matrix_csv(join_path(a.out_dir, "omega_hat.csv"), best.omega_hat.mat(),
                       nf::flat_names(layout), head(inv));

  ordered_json pj;
  pj["invocation"] = head(inv);
  pj["n"] = controls.n();
  pj["p"] = a.p;
  pj["k"] = a.k;
  pj["gamma"] = a.gamma;
  pj["lambda_max"] = path.lambda_max;
  pj["best_index"] = path.best_index;
  pj["best_lambda"] = best.lambda;
  ordered_json grid = ordered_json::array();
  for (std::size_t i = 0; i < path.lambdas.size(); ++i) {
    ordered_json g;
    g["lambda"] = path.lambdas[i];
    g["ebic"] = path.ebics[i];
    g["edges"] = path.path[i].edge_set.size();
    g["iterations"] = path.path[i].iterations;
    g["converged"] = path.path[i].converged;
    grid.push_back(std::move(g));
  }
  pj["grid"] = std::move(grid);
  write_json_file(join_path(a.out_dir, "path.json"), inv, pj);

  std::vector<std::vector<std::string>> rows;
  for (const auto& [na, nb] : best.edge_set) {
    const double fro =
        best.omega_hat.mat().block(na * a.k, nb * a.k, a.k, a.k).norm();
    rows.push_back({std::to_string(na + 1), std::to_string(nb + 1),
                    layout.node_name(na), layout.node_name(nb),
                    nf::fmt_double(fro)});
  }
  nf::write_tsv(join_path(a.out_dir, "edges.tsv"), head(inv),
                {"node_a", "node_b", "name_a", "name_b", "block_fro"}, rows);
  nf::log_info("estimate: " + std::to_string(best.edge_set.size()) +
               " edges at lambda=" + nf::fmt_double(best.lambda));
  return 0;
}

int run_rank(const RankArgs& a, const Invocation& inv) {
  const nf::NodeLayout layout = build_layout(a.p, a.k, a.names_path);
  const nf::Dataset cases = load_dataset(a.case_path, layout, nf::Condition::Case);
  const nf::SymMatrix omega = load_square(a.omega_path, layout.dim());
  ensure_out_dir(a.out_dir);

  const nf::FilteredSummary fs = nf::filter(cases, omega);
  const std::vector<nf::LrtResult> ranked = nf::rank_nodes(fs);

  std::vector<std::string> cols = {"rank", "node", "name", "T",
                                   "df",   "p_raw", "p_adj"};
  for (int t = 0; t < a.k; ++t)
    cols.push_back("mu_hat_" + std::to_string(t + 1));
  std::vector<std::vector<std::string>> rows;
  ordered_json entries = ordered_json::array();
  for (const nf::LrtResult& r : ranked) {
    std::vector<std::string> row = {
        std::to_string(r.rank),      std::to_string(r.node + 1),
        layout.node_name(r.node),    nf::fmt_double(r.statistic),
        std::to_string(r.df),        nf::fmt_double(r.p_raw),
        nf::fmt_double(r.p_adjusted)};
    for (int t = 0; t < a.k; ++t) row.push_back(nf::fmt_double(r.mu_hat(t)));
    rows.push_back(std::move(row));

    ordered_json e;
    e["rank"] = r.rank;
    e["node"] = r.node + 1;
    e["name"] = layout.node_name(r.node);
    e["T"] = r.statistic;
    e["df"] = r.df;
    e["p_raw"] = r.p_raw;
    e["p_adj"] = r.p_adjusted;
    e["mu_hat"] = vector_json(r.mu_hat);
    entries.push_back(std::move(e));
  }
  nf::write_tsv(join_path(a.out_dir, "ranking.tsv"), head(inv), cols, rows);

  ordered_json rj;
  rj["invocation"] = head(inv);
  rj["n"] = fs.n;
  rj["p"] = a.p;
  rj["k"] = a.k;
  rj["ranking"] = std::move(entries);
  write_json_file(join_path(a.out_dir, "ranking.json"), inv, rj);
  return 0;
}

int run_sequential(const SequentialArgs& a, const Invocation& inv) {
  const nf::NodeLayout layout = build_layout(a.p, a.k, a.names_path);
  const nf::Dataset cases = load_dataset(a.case_path, layout, nf::Condition::Case);
  const nf::SymMatrix omega = load_square(a.omega_path, layout.dim());
  if (a.max_steps < 1) throw nf::InvalidConfig("--max-steps must be at least 1");
  std::optional<double> alpha;
  if (!a.rank_all) {
    if (a.alpha <= 0 || a.alpha >= 1)
      throw nf::InvalidConfig("--alpha must be in (0, 1)");
    alpha = a.alpha;
  }
  ensure_out_dir(a.out_dir);

  const nf::FilteredSummary fs = nf::filter(cases, omega);
  const nf::SequentialTrace trace =
      nf::sequential_rank(fs, a.max_steps, alpha, a.pooled_adjust);
  if (trace.low_margin_warning)
    nf::log_info(
        "warning: step 1 statistic margin is low; conditioning on a single "
        "site may be unreliable");

  std::vector<std::vector<std::string>> rows;
  ordered_json steps = ordered_json::array();
  for (std::size_t si = 0; si < trace.steps.size(); ++si) {
    const nf::SequentialStep& st = trace.steps[si];
    ordered_json sj;
    ordered_json found = ordered_json::array();
    for (int node : st.found_before) found.push_back(node + 1);
    sj["step"] = si + 1;
    sj["found_before"] = std::move(found);
    if (st.selected)
      sj["selected"] = *st.selected + 1;
    else
      sj["selected"] = nullptr;
    ordered_json stats = ordered_json::array();
    for (std::size_t ri = 0; ri < st.stats.size(); ++ri) {
      const nf::SeqNodeStat& ns = st.stats[ri];
      ordered_json e;
      e["node"] = ns.node + 1;
      e["name"] = layout.node_name(ns.node);
      e["T_raw"] = ns.statistic_raw;
      e["T"] = ns.statistic;
      e["p_raw"] = ns.p_raw;
      e["p_adj"] = ns.p_adjusted;
      stats.push_back(std::move(e));
      rows.push_back({std::to_string(si + 1), std::to_string(ri + 1),
                      std::to_string(ns.node + 1), layout.node_name(ns.node),
                      nf::fmt_double(ns.statistic_raw),
                      nf::fmt_double(ns.statistic), nf::fmt_double(ns.p_raw),
                      nf::fmt_double(ns.p_adjusted),
                      st.selected && *st.selected == ns.node ? "1" : "0"});
    }
    sj["stats"] = std::move(stats);
    steps.push_back(std::move(sj));
  }
  nf::write_tsv(join_path(a.out_dir, "sequential.tsv"), head(inv),
                {"step", "rank_in_step", "node", "name", "T_raw", "T", "p_raw",
                 "p_adj", "selected"},
                rows);

  ordered_json tj;
  tj["invocation"] = head(inv);
  tj["n"] = fs.n;
  tj["p"] = a.p;
  tj["k"] = a.k;
  if (alpha)
    tj["alpha"] = *alpha;
  else
    tj["alpha"] = nullptr;
  tj["max_steps"] = a.max_steps;
  tj["pooled_adjust"] = a.pooled_adjust;
  tj["stop_reason"] = stop_reason_name(trace.stop_reason);
  tj["low_margin_warning"] = trace.low_margin_warning;
  ordered_json order = ordered_json::array();
  for (int node : trace.selection_order()) order.push_back(node + 1);
  tj["selection_order"] = std::move(order);
  tj["steps"] = std::move(steps);
  write_json_file(join_path(a.out_dir, "sequential.json"), inv, tj);
  return 0;
}

int run_cv(const CvArgs& a, const Invocation& inv) {
  const nf::NodeLayout layout = build_layout(a.p, a.k, a.names_path);
  const nf::Dataset cases = load_dataset(a.case_path, layout, nf::Condition::Case);
  const nf::Dataset controls =
      load_dataset(a.control_path, layout, nf::Condition::Control);
  if (a.folds < 2) throw nf::InvalidConfig("--folds must be at least 2");
  if (a.n_lambda < 1) throw nf::InvalidConfig("--lambdas must be at least 1");
  ensure_out_dir(a.out_dir);

  const nf::CvReport rep =
      nf::cv_mse_rank(cases, controls, a.folds, a.n_lambda, a.gamma,
                      solve_options(a.tol, a.max_iter), a.seed, a.zero_mu);

  // Rows ordered by rank: rank[j] is node j's rank, so invert.
  std::vector<int> by_rank(a.p);
  for (int j = 0; j < a.p; ++j) by_rank[rep.rank[j] - 1] = j;
  std::vector<std::vector<std::string>> rows;
  for (int r = 0; r < a.p; ++r) {
    const int j = by_rank[r];
    rows.push_back({std::to_string(r + 1), std::to_string(j + 1),
                    layout.node_name(j), nf::fmt_double(rep.mean_mse[j]),
                    nf::fmt_double(rep.null_mse)});
  }
  nf::write_tsv(join_path(a.out_dir, "cv.tsv"), head(inv),
                {"rank", "node", "name", "mean_mse", "null_mse"}, rows);

  ordered_json cj;
  cj["invocation"] = head(inv);
  cj["folds"] = rep.folds;
  cj["seed"] = a.seed;
  cj["zero_mu"] = a.zero_mu;
  cj["null_mse"] = rep.null_mse;
  ordered_json nodes = ordered_json::array();
  for (int j = 0; j < a.p; ++j) {
    ordered_json e;
    e["node"] = j + 1;
    e["name"] = layout.node_name(j);
    e["mean_mse"] = rep.mean_mse[j];
    e["rank"] = rep.rank[j];
    nodes.push_back(std::move(e));
  }
  cj["nodes"] = std::move(nodes);
  ordered_json folds = ordered_json::array();
  for (const auto& f : rep.fold_mse) {
    ordered_json fv = ordered_json::array();
    for (double v : f) fv.push_back(v);
    folds.push_back(std::move(fv));
  }
  cj["fold_mse"] = std::move(folds);
  write_json_file(join_path(a.out_dir, "cv.json"), inv, cj);
  return 0;
}

int run_accuracy(const AccuracyArgs& a, const Invocation& inv) {
  const nf::NodeLayout layout = build_layout(a.p, a.k, "");
  const nf::SymMatrix omega = load_square(a.omega_path, layout.dim());
  const nf::SymMatrix omega_tilde = load_square(a.omega_tilde_path, layout.dim());
  if (a.node < 1 || a.node > a.p)
    throw nf::NodeOutOfRange("--node must be in 1.." + std::to_string(a.p));
  if (a.n < 1) throw nf::InvalidConfig("--n must be at least 1");
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(layout.dim());
  if (!a.mu_path.empty()) {
    const Eigen::MatrixXd m = nf::read_matrix_csv(a.mu_path);
    if ((m.rows() != 1 && m.cols() != 1) || m.size() != layout.dim())
      throw nf::DimensionMismatch(a.mu_path + ": mean vector needs " +
                                  std::to_string(layout.dim()) + " entries");
    mu = m.rows() == 1 ? Eigen::VectorXd(m.row(0).transpose())
                       : Eigen::VectorXd(m.col(0));
  }
  ensure_out_dir(a.out_dir);

  const int node = a.node - 1;
  const nf::DiscrepancyReport rep =
      nf::discrepancy_moments(omega, omega_tilde, node, layout, mu, a.n);
  const auto [ratio_mean, ratio_var] =
      nf::spectral_norm_bound(omega, omega_tilde, node, layout, mu, a.n);

  ordered_json aj;
  aj["invocation"] = head(inv);
  aj["node"] = a.node;
  aj["n"] = a.n;
  aj["d"] = matrix_json(rep.d);
  aj["eigenvalues"] = rep.eigenvalues;
  aj["multiplicities"] = rep.multiplicities;
  aj["noncentralities"] = rep.noncentralities;
  aj["mean"] = rep.mean;
  aj["variance"] = rep.variance;
  aj["spectral_ratio_mean"] = ratio_mean;
  aj["spectral_ratio_var"] = ratio_var;
  write_json_file(join_path(a.out_dir, "accuracy.json"), inv, aj);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i)
    rows.push_back({std::to_string(i + 1), nf::fmt_double(rep.eigenvalues[i]),
                    std::to_string(rep.multiplicities[i]),
                    nf::fmt_double(rep.noncentralities[i])});
  nf::write_tsv(join_path(a.out_dir, "accuracy.tsv"), head(inv),
                {"component", "eigenvalue", "multiplicity", "noncentrality"},
                rows);
  return 0;
}

namespace {

std::vector<nf::MethodId> preset_methods(const std::string& preset) {
  if (preset == "multi-target")
    return {nf::MethodId::SeqMultiNf, nf::MethodId::MultiNf,
            nf::MethodId::Hotelling};
  if (preset == "separated")
    return {nf::MethodId::MultiNf, nf::MethodId::SeparatedNf};
  if (preset == "low-snr") return {nf::MethodId::MultiNf};
  return {nf::MethodId::MultiNf, nf::MethodId::SingleNf, nf::MethodId::Hotelling,
          nf::MethodId::Ttest};
}

std::vector<nf::MethodId> parse_methods(const std::string& csv) {
  std::vector<nf::MethodId> out;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(nf::method_from_name(tok));
  }
  if (out.empty()) throw nf::InvalidConfig("--methods list is empty");
  return out;
}

ordered_json config_json(const nf::SimConfig& c) {
  ordered_json j;
  j["p"] = c.p;
  j["k"] = c.k;
  j["blocks"] = c.blocks;
  j["theta_within"] = c.theta_within;
  j["theta_across"] = c.theta_across;
  j["rho_in"] = c.rho_in;
  j["rho_out"] = c.rho_out;
  j["snr"] = c.snr;
  j["snr_secondary"] = c.snr_secondary;
  j["n"] = c.n;
  j["n_lambda"] = c.n_lambda;
  j["gamma"] = c.gamma;
  j["single_attr"] = c.single_attr + 1;
  j["tol"] = c.solve.tol;
  j["max_iter"] = c.solve.max_iter;
  j["seed"] = c.seed;
  return j;
}

}  // namespace

int run_simulate(const SimulateArgs& a, const Invocation& inv) {
  const bool multi_target = a.preset == "multi-target";
  const std::vector<nf::MethodId> methods = a.methods_csv.empty()
                                                ? preset_methods(a.preset)
                                                : parse_methods(a.methods_csv);
  if (a.networks < 1) throw nf::InvalidConfig("--networks must be at least 1");
  ensure_out_dir(a.out_dir);

  const nf::EvalReport rep =
      multi_target
          ? nf::run_multi_target_study(a.cfg, methods, a.networks,
                                       a.pairs_per_network, a.threads)
          : nf::run_single_target_study(a.cfg, methods, a.networks, a.threads);
  nf::log_info("simulate: " + std::to_string(rep.n_networks) + " networks in " +
               nf::fmt_double(rep.runtime_seconds) + "s, " +
               std::to_string(rep.excluded) + " trials excluded");

  ordered_json ej;
  ej["invocation"] = head(inv);
  ej["study"] = multi_target ? "multi_target" : "single_target";
  ej["preset"] = a.preset;
  ej["config"] = config_json(a.cfg);
  ej["n_networks"] = rep.n_networks;
  ej["trials_per_network"] = rep.trials_per_network;
  ej["excluded"] = rep.excluded;
  ej["top_k"] = multi_target ? 2 : 1;
  ordered_json pm = ordered_json::array();
  for (const nf::MethodMetrics& m : rep.per_method) {
    ordered_json e;
    e["method"] = nf::method_name(m.method);
    e["top_prob"] = m.top_prob;
    e["auc"] = m.auc;
    e["n_trials"] = m.n_trials;
    pm.push_back(std::move(e));
  }
  ej["methods"] = std::move(pm);
  write_json_file(join_path(a.out_dir, "eval_report.json"), inv, ej);

  std::vector<std::vector<std::string>> rows;
  for (const nf::MethodMetrics& m : rep.per_method) {
    const std::string name = nf::method_name(m.method);
    for (std::size_t i = 0; i < m.roc.x.size(); ++i)
      rows.push_back({name, std::to_string(i), nf::fmt_double(m.roc.x[i]),
                      nf::fmt_double(m.roc.y[i])});
  }
  nf::write_tsv(join_path(a.out_dir, "roc.tsv"), head(inv),
                {"method", "k", "x", "y"}, rows);

  ordered_json mj;
  mj["invocation"] = head(inv);
  mj["command"] = "simulate";
  mj["preset"] = a.preset;
  mj["study"] = multi_target ? "multi_target" : "single_target";
  mj["config"] = config_json(a.cfg);
  ordered_json mnames = ordered_json::array();
  for (nf::MethodId m : methods) mnames.push_back(nf::method_name(m));
  mj["methods"] = std::move(mnames);
  mj["networks"] = a.networks;
  mj["pairs_per_network"] = multi_target ? a.pairs_per_network : 0;
  mj["threads"] = a.threads;
  mj["network_seeds"] = rep.network_seeds;
  mj["excluded"] = rep.excluded;
  write_json_file(join_path(a.out_dir, "manifest.json"), inv, mj);
  return 0;
}

}  // namespace nfcli
