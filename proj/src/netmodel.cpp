#include "netfilter/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netfilter/numcore.hpp"
#include "netfilter/rng.hpp"

namespace nf {

bool Graph::has_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
}

Graph sbm_graph(int p, const std::vector<int>& blocks, double theta_within,
                double theta_across, std::uint64_t seed) {
  if (p < 1) throw InvalidConfig("graph needs at least one node");
  if (blocks.empty()) throw InvalidConfig("block size list is empty");
  for (int b : blocks)
    if (b < 1) throw InvalidConfig("block sizes must be positive");
  if (std::accumulate(blocks.begin(), blocks.end(), 0) != p)
    throw InvalidConfig("block sizes must sum to p");
  if (theta_within < 0.0 || theta_within > 1.0 || theta_across < 0.0 ||
      theta_across > 1.0)
    throw InvalidConfig("link probabilities must lie in [0,1]");

  Graph g;
  g.p = p;
  g.block_of.resize(p);
  int node = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int i = 0; i < blocks[b]; ++i) g.block_of[node++] = static_cast<int>(b);

  NormalSampler rng(seed);
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      const double theta =
          g.block_of[a] == g.block_of[b] ? theta_within : theta_across;
      if (rng.uniform() < theta) g.edges.emplace_back(a, b);
    }
  }
  return g;
}

TruePrecision build_precision(const Graph& g, int k, double rho_in, double rho_out) {
  if (g.p < 1) throw InvalidConfig("empty graph");
  if (k < 1) throw InvalidConfig("need at least one attribute");
  const int d = g.p * k;
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < g.p; ++i) {
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b)
        omega(i * k + a, i * k + b) = (a == b) ? 1.0 : -rho_in;
    }
  }
  for (const auto& [a, b] : g.edges) {
    for (int u = 0; u < k; ++u)
      for (int v = 0; v < k; ++v) {
        omega(a * k + u, b * k + v) = -rho_out;
        omega(b * k + v, a * k + u) = -rho_out;
      }
  }

  // Lift the diagonal in 0.05 steps until the spectrum clears 0.5, then
  // rescale to unit diagonal. The lift is uniform, so rescaling is a single
  // division and the zero pattern is untouched.
  double lift = 0.0;
  for (;;) {
    SymMatrix candidate(omega + lift * Eigen::MatrixXd::Identity(d, d));
    if (min_eigenvalue(candidate) >= 0.5) break;
    lift += 0.05;
    if (lift > 1e6) throw NumericError("diagonal lift did not terminate");
  }
  omega.diagonal().array() += lift;
  omega /= (1.0 + lift);

  TruePrecision tp;
  tp.layout = make_layout(g.p, k);
  tp.omega = SymMatrix(std::move(omega));
  tp.rho_in = rho_in;
  tp.rho_out = rho_out;
  return tp;
}

PerturbationSpec perturbation_from_snr(const TruePrecision& tp,
                                       const std::vector<int>& nodes,
                                       const std::vector<double>& snr) {
  if (nodes.size() != snr.size())
    throw DimensionMismatch("perturbed node and snr lists differ in length");
  PerturbationSpec spec;
  spec.mu = Eigen::VectorXd::Zero(tp.layout.dim());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    tp.layout.check_node(nodes[i]);
    for (int flat : tp.layout.node_indices(nodes[i])) spec.mu[flat] = snr[i];
  }
  spec.perturbed_nodes = nodes;
  spec.snr = snr;
  return spec;
}

Dataset sample(const TruePrecision& tp, const std::optional<PerturbationSpec>& mu,
               int n, std::uint64_t seed, Condition condition) {
  if (n < 1) throw TooFewSamples("need at least one sample");
  const int d = tp.layout.dim();
  const SymMatrix sigma = spd_inverse(tp.omega);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  if (mu) {
    if (mu->mu.size() != d) throw DimensionMismatch("mu length does not match layout");
    mean = sigma.mat() * mu->mu;
  }
  const Eigen::MatrixXd l = cholesky(sigma);

  Dataset out;
  out.layout = tp.layout;
  out.condition = condition;
  out.seed = seed;
  out.samples.resize(n, d);
  NormalSampler rng(seed);
  Eigen::VectorXd z(d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z[j] = rng.next();
    out.samples.row(i) = (mean + l * z).transpose();
  }
  return out;
}

Dataset select_attribute(const Dataset& d, int attr) {
  if (attr < 0 || attr >= d.layout.k) throw IndexOutOfRange("attribute out of range");
  Dataset out;
  out.layout = make_layout(d.layout.p, 1, d.layout.node_names,
                           {d.layout.attr_names[attr]});
  out.condition = d.condition;
  out.seed = d.seed;
  out.samples.resize(d.samples.rows(), d.layout.p);
  for (int i = 0; i < d.layout.p; ++i)
    out.samples.col(i) = d.samples.col(i * d.layout.k + attr);
  return out;
}

}  // namespace nf
