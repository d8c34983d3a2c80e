#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "netfilter/layout.hpp"
#include "netfilter/sym_matrix.hpp"

namespace nf {

enum class Condition { Control, Case };

// Undirected graph on p nodes with a block assignment per node.
struct Graph {
  int p = 0;
  std::vector<std::pair<int, int>> edges;  // a < b, sorted lexicographically
  std::vector<int> block_of;               // size p

  bool has_edge(int a, int b) const;
};

// Stochastic block model: nodes are split into consecutive blocks of the
// given sizes; each within-block pair is linked with probability
// theta_within, each across-block pair with theta_across.
Graph sbm_graph(int p, const std::vector<int>& blocks, double theta_within,
                double theta_across, std::uint64_t seed);

struct TruePrecision {
  NodeLayout layout;
  SymMatrix omega;
  double rho_in = 0.0;
  double rho_out = 0.0;
};

// Block precision matrix for a graph: within-node off-diagonals -rho_in,
// linked-pair blocks filled with -rho_out, diagonal lifted in steps of 0.05
// until the minimum eigenvalue reaches 0.5, then rescaled to unit diagonal.
TruePrecision build_precision(const Graph& g, int k, double rho_in, double rho_out);

struct PerturbationSpec {
  Eigen::VectorXd mu;                // length p*k
  std::vector<int> perturbed_nodes;  // 0-based
  std::vector<double> snr;           // parallel to perturbed_nodes
};

// Mean vector with every attribute of each listed node set to its snr value
// (the post-scaling precision diagonal is 1, so the entry equals the snr).
PerturbationSpec perturbation_from_snr(const TruePrecision& tp,
                                       const std::vector<int>& nodes,
                                       const std::vector<double>& snr);

struct Dataset {
  NodeLayout layout;
  Eigen::MatrixXd samples;  // n x (p*k)
  Condition condition = Condition::Control;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(samples.rows()); }
};

// n draws from N(Sigma * mu, Sigma) with Sigma = omega^{-1}; mu absent means
// the null mean. Deterministic for a fixed seed.
Dataset sample(const TruePrecision& tp, const std::optional<PerturbationSpec>& mu,
               int n, std::uint64_t seed, Condition condition);

// View of a single attribute across all nodes (k=1 layout, same samples).
Dataset select_attribute(const Dataset& d, int attr);

}  // namespace nf
