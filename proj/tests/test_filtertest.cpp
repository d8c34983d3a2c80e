#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "doctest.h"
#include "netfilter/errors.hpp"
#include "netfilter/filtertest.hpp"
#include "netfilter/netmodel.hpp"
#include "netfilter/numcore.hpp"
#include "netfilter/rng.hpp"

using nf::Dataset;
using nf::FilteredSummary;
using nf::SymMatrix;

namespace {

nf::TruePrecision chain_net(int p, int k) {
  nf::Graph g;
  g.p = p;
  for (int i = 0; i + 1 < p; ++i) g.edges.push_back({i, i + 1});
  g.block_of.assign(p, 0);
  return nf::build_precision(g, k, 0.8, 0.2);
}

Dataset dataset_from(const Eigen::MatrixXd& rows, int p, int k) {
  Dataset d;
  d.layout = nf::make_layout(p, k);
  d.samples = rows;
  return d;
}

SymMatrix random_precision(int dim, std::uint64_t seed) {
  nf::NormalSampler rng(seed);
  Eigen::MatrixXd b(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) b(i, j) = 0.4 * rng.next();
  return SymMatrix(b * b.transpose() + Eigen::MatrixXd::Identity(dim, dim));
}

FilteredSummary random_summary(int p, int k, std::uint64_t seed, int n = 25) {
  nf::NormalSampler rng(seed);
  Eigen::MatrixXd rows(n, p * k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p * k; ++j) rows(i, j) = rng.next();
  return nf::filter(dataset_from(rows, p, k), random_precision(p * k, seed + 1));
}

}  // namespace

TEST_CASE("filter computes the filtered mean and covariance pair") {
  nf::TruePrecision tp = chain_net(3, 2);
  Dataset d = nf::sample(tp, std::nullopt, 40, 3, nf::Condition::Case);
  FilteredSummary fs = nf::filter(d, tp.omega);
  CHECK(fs.n == 40);
  Eigen::VectorXd ybar = d.samples.colwise().mean();
  CHECK((fs.ybar - ybar).cwiseAbs().maxCoeff() == 0.0);
  CHECK((fs.zbar - tp.omega.mat() * ybar).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((fs.sigma.mat() * fs.omega.mat() - Eigen::MatrixXd::Identity(6, 6))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  Dataset wrong = nf::sample(tp, std::nullopt, 10, 4, nf::Condition::Case);
  wrong.samples.conservativeResize(10, 4);
  wrong.layout = nf::make_layout(2, 2);
  CHECK_THROWS_AS(nf::filter(wrong, tp.omega), nf::DimensionMismatch);
}

TEST_CASE("mu_mle reduces to the filtered mean on a decoupled group") {
  // Node 0 is isolated, so its covariance decouples from the rest and the
  // restricted estimate equals the filtered mean on the group.
  nf::Graph g;
  g.p = 4;
  g.edges = {{2, 3}};
  g.block_of.assign(4, 0);
  nf::TruePrecision tp = nf::build_precision(g, 2, 0.8, 0.2);
  Dataset d = nf::sample(tp, nf::perturbation_from_snr(tp, {0}, {0.5}), 30, 9,
                         nf::Condition::Case);
  FilteredSummary fs = nf::filter(d, tp.omega);
  std::vector<int> group = tp.layout.node_indices(0);
  Eigen::VectorXd mu = nf::mu_mle(fs, group, true);
  Eigen::VectorXd zg(2);
  zg << fs.zbar(0), fs.zbar(1);
  CHECK((mu - zg).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mu_mle internal cross-check holds on random instances") {
  for (int s = 0; s < 50; ++s) {
    FilteredSummary fs = random_summary(3, 2, 500 + s);
    CHECK_NOTHROW(nf::mu_mle(fs, fs.layout.node_indices(s % 3), true));
  }
}

TEST_CASE("lrt_statistic on a single attribute matches the scalar formula") {
  FilteredSummary fs = random_summary(3, 1, 42);
  nf::LrtResult r = nf::lrt_statistic(fs, {1}, true);
  const double sigma11 = fs.sigma(1, 1);
  CHECK(r.statistic ==
        doctest::Approx(fs.n * fs.ybar(1) * fs.ybar(1) / sigma11).epsilon(1e-10));
  CHECK(r.df == 1);
  CHECK(r.p_raw == doctest::Approx(1.0 - nf::chisq_cdf(r.statistic, 1)).epsilon(1e-12));
  CHECK(r.mu_hat.size() == 1);
}

TEST_CASE("lrt_statistic validates groups and stays nonnegative") {
  FilteredSummary fs = random_summary(3, 2, 77);
  CHECK_THROWS_AS(nf::lrt_statistic(fs, {}), nf::InvalidConfig);
  CHECK_THROWS_AS(nf::lrt_statistic(fs, {0, 0}), nf::InvalidConfig);
  CHECK_THROWS_AS(nf::lrt_statistic(fs, {99}), nf::IndexOutOfRange);
  for (int s = 0; s < 100; ++s) {
    FilteredSummary r = random_summary(2 + s % 3, 1 + s % 2, 900 + s);
    nf::LrtResult one = nf::lrt_statistic(r, {0}, true);
    CHECK(one.statistic >= 0.0);
  }
}

TEST_CASE("rank_nodes orders by statistic with index tie-break") {
  // Identical duplicated columns force exact ties; the lower node index wins.
  Eigen::MatrixXd rows(10, 2);
  nf::NormalSampler rng(4);
  for (int i = 0; i < 10; ++i) {
    rows(i, 0) = rng.next();
    rows(i, 1) = rows(i, 0);
  }
  FilteredSummary fs = nf::filter(dataset_from(rows, 2, 1), SymMatrix::identity(2));
  std::vector<nf::LrtResult> ranked = nf::rank_nodes(fs);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].statistic == ranked[1].statistic);
  CHECK(ranked[0].node == 0);
  CHECK(ranked[0].rank == 1);
  CHECK(ranked[1].rank == 2);
}

TEST_CASE("rank_nodes covers every node exactly once") {
  FilteredSummary fs = random_summary(5, 2, 1234);
  std::vector<nf::LrtResult> ranked = nf::rank_nodes(fs, true);
  REQUIRE(ranked.size() == 5);
  std::vector<bool> seen(5, false);
  double prev = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < ranked.size(); ++i) {
    CHECK(ranked[i].rank == static_cast<int>(i) + 1);
    CHECK(ranked[i].statistic <= prev);
    prev = ranked[i].statistic;
    seen[ranked[i].node] = true;
    CHECK(ranked[i].df == 2);
  }
  for (bool b : seen) CHECK(b);
}

TEST_CASE("by_adjust worked example and properties") {
  std::vector<double> adj = nf::by_adjust({0.01, 0.02, 0.03});
  REQUIRE(adj.size() == 3);
  for (double a : adj) CHECK(a == doctest::Approx(0.055).epsilon(1e-12));
  // Order of the input is preserved.
  std::vector<double> scrambled = nf::by_adjust({0.03, 0.01});
  CHECK(scrambled[1] <= scrambled[0]);
  // Caps at one.
  for (double a : nf::by_adjust({0.9, 0.95})) CHECK(a == 1.0);
  // Single p-value is scaled by the harmonic factor (here 1).
  CHECK(nf::by_adjust({0.2})[0] == doctest::Approx(0.2).epsilon(1e-12));
  // Adjusted values never fall below the raw ones.
  std::vector<double> raw{0.001, 0.3, 0.04, 0.9};
  std::vector<double> a = nf::by_adjust(raw);
  for (size_t i = 0; i < raw.size(); ++i) CHECK(a[i] >= raw[i]);
}

TEST_CASE("stochastic_dominance_check flags the perturbed site") {
  nf::TruePrecision tp = chain_net(4, 2);
  nf::PerturbationSpec spec = nf::perturbation_from_snr(tp, {2}, {1.0});
  nf::DominanceReport rep = nf::stochastic_dominance_check(tp, spec, 400, 50, 21);
  CHECK(rep.perturbed_node == 2);
  CHECK(rep.n_reps == 400);
  CHECK(rep.dominates);
  for (int j = 0; j < 4; ++j) {
    CHECK(rep.mean_statistic[j] >= 0.0);
    if (j != 2) {
      CHECK(rep.mean_statistic[2] > rep.mean_statistic[j]);
      CHECK(rep.prob_perturbed_higher[j] > 0.5);
    }
  }
  // The noncentrality uses the propagated mean restricted to the node.
  SymMatrix sigma = nf::spd_inverse(tp.omega);
  Eigen::VectorXd propagated = sigma.mat() * spec.mu;
  Eigen::MatrixXd s22 = nf::submatrix(sigma, {4, 5}, {4, 5});
  Eigen::VectorXd m(2);
  m << propagated(4), propagated(5);
  double expect = 50.0 * m.dot(s22.inverse() * m);
  CHECK(rep.noncentrality[2] == doctest::Approx(expect).epsilon(1e-9));
}
