#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "netfilter/filtertest.hpp"
#include "netfilter/netmodel.hpp"

namespace nf {

// Candidate statistic at one sequential step, conditional on the found set:
// T_i^[s+1] = T_{(i,S)} - T_S via nested group LRTs. Returned raw; callers
// clip tiny negatives (floating point only) at zero for ranking.
double sequential_statistic(const FilteredSummary& fs,
                            const std::vector<int>& s_nodes, int candidate);

struct SeqNodeStat {
  int node = -1;
  double statistic_raw = 0.0;  // may be ~ -1e-12
  double statistic = 0.0;      // clipped at 0
  double p_raw = 1.0;
  double p_adjusted = 1.0;
};

struct SequentialStep {
  std::vector<int> found_before;    // S at the start of the step
  std::vector<SeqNodeStat> stats;   // remaining nodes, ranked
  std::optional<int> selected;      // empty when the scan stopped the run
};

enum class StopReason { MaxSteps, NoSignificant, Exhausted };

struct SequentialTrace {
  std::vector<SequentialStep> steps;
  StopReason stop_reason = StopReason::MaxSteps;
  // Heuristic flag (not part of the underlying method): step 1's top
  // statistic is under twice the runner-up, so conditioning on a single
  // confident site is questionable.
  bool low_margin_warning = false;

  // Nodes in selection order.
  std::vector<int> selection_order() const;
};

// Greedy multi-target scan: each step tests every remaining node conditional
// on the found set (df = k), adjusts p-values Benjamini-Yekutieli within the
// step (or pooled across steps afterwards), selects the largest statistic,
// and stops at max_steps, exhaustion, or - when alpha is given - the first
// step with no adjusted p below alpha.
SequentialTrace sequential_rank(const FilteredSummary& fs, int max_steps,
                                std::optional<double> alpha,
                                bool pooled_adjust = false);

struct ExpectedGainReport {
  double empirical_mean = 0.0;
  double mc_se = 0.0;
  double closed_form = 0.0;
  double abs_se_discrepancy = 0.0;  // |empirical - closed| / se
  int n_reps = 0;
};

// Monte Carlo check of the expected drop E(T_i - T_i^[s+1]) against its
// closed form n * mu^T [ P_i + P_S - P_{i u S} ] mu, where P_G =
// Sigma_{.,G} Sigma_GG^{-1} Sigma_{G,.}.
ExpectedGainReport expected_gain_check(const TruePrecision& tp,
                                       const PerturbationSpec& mu,
                                       const std::vector<int>& s_nodes,
                                       int candidate, int n_reps, int n,
                                       std::uint64_t seed);

}  // namespace nf
