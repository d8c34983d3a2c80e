#include <cstdio>
#include <exception>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "netfilter/errors.hpp"
#include "netfilter/version.hpp"

namespace {

// Rebuild the command line for output headers; argv[0] is reduced to its
// basename so files do not embed build paths.
std::string invocation_text(int argc, char** argv) {
  std::ostringstream out;
  for (int i = 0; i < argc; ++i) {
    std::string arg = argv[i];
    if (i == 0) arg = std::filesystem::path(arg).filename().string();
    if (i) out << " ";
    if (arg.find_first_of(" \t'\"") != std::string::npos)
      out << "'" << arg << "'";
    else
      out << arg;
  }
  return out.str();
}

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void add_layout_flags(CLI::App* cmd, int& p, int& k, std::string& names) {
  cmd->add_option("--p", p, "number of nodes")->required();
  cmd->add_option("--k", k, "attributes per node")->required();
  cmd->add_option("--names", names, "node names file, one per line")
      ->check(CLI::ExistingFile);
}

void add_solver_flags(CLI::App* cmd, int& n_lambda, double& gamma, double& tol,
                      int& max_iter) {
  cmd->add_option("--lambdas", n_lambda, "lambda grid size");
  cmd->add_option("--gamma", gamma, "EBIC sparsity parameter");
  cmd->add_option("--tol", tol, "solver relative tolerance");
  cmd->add_option("--max-iter", max_iter, "solver iteration cap");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-attribute network filtering: estimation, perturbation "
               "ranking, sequential detection, diagnostics"};
  app.set_version_flag("--version", std::string("netfilter ") + nf::kVersion);
  app.require_subcommand(1);

  const nfcli::Invocation inv{invocation_text(argc, argv)};

  nfcli::EstimateArgs ea;
  CLI::App* est = app.add_subcommand(
      "estimate", "penalized block precision estimation on control samples");
  est->add_option("--control", ea.control_path, "control sample CSV (n x p*k)")
      ->required()
      ->check(CLI::ExistingFile);
  add_layout_flags(est, ea.p, ea.k, ea.names_path);
  est->add_option("--weights", ea.weights_path, "p x p penalty weight CSV")
      ->check(CLI::ExistingFile);
  add_solver_flags(est, ea.n_lambda, ea.gamma, ea.tol, ea.max_iter);
  est->add_option("--out", ea.out_dir, "output directory")->required();

  nfcli::RankArgs ra;
  CLI::App* rnk = app.add_subcommand(
      "rank", "rank nodes by network-filtered perturbation statistic");
  rnk->add_option("--case", ra.case_path, "case sample CSV (n x p*k)")
      ->required()
      ->check(CLI::ExistingFile);
  rnk->add_option("--omega", ra.omega_path, "precision matrix CSV (p*k square)")
      ->required()
      ->check(CLI::ExistingFile);
  add_layout_flags(rnk, ra.p, ra.k, ra.names_path);
  rnk->add_option("--out", ra.out_dir, "output directory")->required();

  nfcli::SequentialArgs qa;
  CLI::App* seq = app.add_subcommand(
      "sequential", "greedy multi-site detection with nested statistics");
  seq->add_option("--case", qa.case_path, "case sample CSV (n x p*k)")
      ->required()
      ->check(CLI::ExistingFile);
  seq->add_option("--omega", qa.omega_path, "precision matrix CSV (p*k square)")
      ->required()
      ->check(CLI::ExistingFile);
  add_layout_flags(seq, qa.p, qa.k, qa.names_path);
  seq->add_option("--alpha", qa.alpha, "stop when no adjusted p falls below");
  seq->add_flag("--rank-all", qa.rank_all, "ignore alpha, run to --max-steps");
  seq->add_option("--max-steps", qa.max_steps, "maximum sites to select");
  seq->add_flag("--pooled-adjust", qa.pooled_adjust,
                "adjust p-values across all steps instead of within each step");
  seq->add_option("--out", qa.out_dir, "output directory")->required();

  nfcli::CvArgs ca;
  CLI::App* cv = app.add_subcommand(
      "cv", "cross-validated localization by predictive mean squared error");
  cv->add_option("--case", ca.case_path, "case sample CSV (n x p*k)")
      ->required()
      ->check(CLI::ExistingFile);
  cv->add_option("--control", ca.control_path, "control sample CSV (n x p*k)")
      ->required()
      ->check(CLI::ExistingFile);
  add_layout_flags(cv, ca.p, ca.k, ca.names_path);
  cv->add_option("--folds", ca.folds, "number of folds");
  add_solver_flags(cv, ca.n_lambda, ca.gamma, ca.tol, ca.max_iter);
  cv->add_flag("--zero-mu", ca.zero_mu, "score the zero-perturbation baseline");
  cv->add_option("--seed", ca.seed, "fold assignment seed");
  cv->add_option("--out", ca.out_dir, "output directory")->required();

  nfcli::AccuracyArgs aa;
  CLI::App* acc = app.add_subcommand(
      "accuracy", "statistic error distribution under a perturbed precision");
  acc->add_option("--omega", aa.omega_path, "reference precision CSV")
      ->required()
      ->check(CLI::ExistingFile);
  acc->add_option("--omega-tilde", aa.omega_tilde_path, "perturbed precision CSV")
      ->required()
      ->check(CLI::ExistingFile);
  acc->add_option("--p", aa.p, "number of nodes")->required();
  acc->add_option("--k", aa.k, "attributes per node")->required();
  acc->add_option("--node", aa.node, "node under test, 1-based")->required();
  acc->add_option("--mu", aa.mu_path, "mean perturbation CSV (one row or column)")
      ->check(CLI::ExistingFile);
  acc->add_option("--n", aa.n, "sample size the statistic uses");
  acc->add_option("--out", aa.out_dir, "output directory")->required();

  nfcli::SimulateArgs sa;
  sa.threads = default_threads();
  std::string blocks_csv;
  CLI::App* sim = app.add_subcommand(
      "simulate", "seeded end-to-end recovery study on synthetic networks");
  sim->add_option("--preset", sa.preset, "study preset")
      ->default_val("single-target")
      ->check(CLI::IsMember(
          {"single-target", "multi-target", "separated", "low-snr"}));
  sim->add_option("--p", sa.cfg.p, "number of nodes");
  sim->add_option("--k", sa.cfg.k, "attributes per node");
  sim->add_option("--blocks", blocks_csv, "block sizes, comma separated");
  sim->add_option("--theta-within", sa.cfg.theta_within,
                  "within-block edge probability");
  sim->add_option("--theta-across", sa.cfg.theta_across,
                  "across-block edge probability");
  sim->add_option("--rho-in", sa.cfg.rho_in, "within-node coupling");
  sim->add_option("--rho-out", sa.cfg.rho_out, "between-node coupling");
  sim->add_option("--snr", sa.cfg.snr, "perturbation size");
  sim->add_option("--snr-secondary", sa.cfg.snr_secondary,
                  "second-site perturbation size (multi-target)");
  sim->add_option("--n", sa.cfg.n, "samples per condition");
  sim->add_option("--networks", sa.networks, "number of simulated networks");
  sim->add_option("--pairs-per-network", sa.pairs_per_network,
                  "site pairs per network (multi-target)");
  sim->add_option("--methods", sa.methods_csv,
                  "comma separated method list overriding the preset");
  int single_attr_flag = 1;
  sim->add_option("--single-attr", single_attr_flag,
                  "attribute used by single-attribute methods, 1-based");
  add_solver_flags(sim, sa.cfg.n_lambda, sa.cfg.gamma, sa.cfg.solve.tol,
                   sa.cfg.solve.max_iter);
  sim->add_option("--seed", sa.cfg.seed, "master seed");
  sim->add_option("--threads", sa.threads, "worker threads for replicates");
  sim->add_option("--out", sa.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (est->parsed()) return nfcli::run_estimate(ea, inv);
    if (rnk->parsed()) return nfcli::run_rank(ra, inv);
    if (seq->parsed()) return nfcli::run_sequential(qa, inv);
    if (cv->parsed()) return nfcli::run_cv(ca, inv);
    if (acc->parsed()) return nfcli::run_accuracy(aa, inv);
    if (sim->parsed()) {
      if (sim->count("--snr") == 0 && sa.preset == "low-snr") sa.cfg.snr = 0.05;
      if (sim->count("--theta-across") == 0 && sa.preset == "multi-target")
        sa.cfg.theta_across = 0.0;
      if (!blocks_csv.empty()) {
        sa.cfg.blocks.clear();
        std::istringstream in(blocks_csv);
        std::string tok;
        while (std::getline(in, tok, ',')) {
          try {
            sa.cfg.blocks.push_back(std::stoi(tok));
          } catch (const std::exception&) {
            throw nf::InvalidConfig("--blocks must be comma separated integers");
          }
        }
      }
      if (single_attr_flag < 1 || single_attr_flag > sa.cfg.k)
        throw nf::InvalidConfig("--single-attr must be in 1..k");
      sa.cfg.single_attr = single_attr_flag - 1;
      return nfcli::run_simulate(sa, inv);
    }
    std::fprintf(stderr, "error: no subcommand\n");
    return 2;
  } catch (const nf::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const nf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
