#pragma once

#include <cstdint>
#include <string>

#include "netfilter/evaluate.hpp"

namespace nfcli {

// Reassembled command line; goes into every output header so a result file
// names the run that produced it.
struct Invocation {
  std::string text;
};

struct EstimateArgs {
  std::string control_path;
  int p = 0;
  int k = 0;
  std::string weights_path;
  std::string names_path;
  int n_lambda = 30;
  double gamma = 0.5;
  double tol = 1e-6;
  int max_iter = 500;
  std::string out_dir;
};

struct RankArgs {
  std::string case_path;
  std::string omega_path;
  int p = 0;
  int k = 0;
  std::string names_path;
  std::string out_dir;
};

struct SequentialArgs {
  std::string case_path;
  std::string omega_path;
  int p = 0;
  int k = 0;
  std::string names_path;
  double alpha = 0.05;
  bool rank_all = false;  // ignore alpha, run to max_steps
  int max_steps = 5;
  bool pooled_adjust = false;
  std::string out_dir;
};

struct CvArgs {
  std::string case_path;
  std::string control_path;
  int p = 0;
  int k = 0;
  std::string names_path;
  int folds = 10;
  int n_lambda = 30;
  double gamma = 0.5;
  double tol = 1e-6;
  int max_iter = 500;
  bool zero_mu = false;
  std::uint64_t seed = 1;
  std::string out_dir;
};

struct AccuracyArgs {
  std::string omega_path;
  std::string omega_tilde_path;
  int p = 0;
  int k = 0;
  int node = 1;  // 1-based
  std::string mu_path;
  int n = 1;
  std::string out_dir;
};

struct SimulateArgs {
  std::string preset;  // single-target | multi-target | separated | low-snr
  nf::SimConfig cfg;
  std::string methods_csv;  // overrides the preset method list when non-empty
  int networks = 100;
  int pairs_per_network = 5;
  int threads = 1;
  std::string out_dir;
};

int run_estimate(const EstimateArgs& a, const Invocation& inv);
int run_rank(const RankArgs& a, const Invocation& inv);
int run_sequential(const SequentialArgs& a, const Invocation& inv);
int run_cv(const CvArgs& a, const Invocation& inv);
int run_accuracy(const AccuracyArgs& a, const Invocation& inv);
int run_simulate(const SimulateArgs& a, const Invocation& inv);

}  // namespace nfcli
