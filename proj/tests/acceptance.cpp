// Acceptance gate: one check per stated criterion, each printing a single
// [PASS]/[FAIL] line with the measured values. Run with a criterion number
// (1..11) or "e2e"; no argument runs everything.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "netfilter/accuracy.hpp"
#include "netfilter/errors.hpp"
#include "netfilter/estimate.hpp"
#include "netfilter/evaluate.hpp"
#include "netfilter/filtertest.hpp"
#include "netfilter/io.hpp"
#include "netfilter/netmodel.hpp"
#include "netfilter/numcore.hpp"
#include "netfilter/rng.hpp"
#include "netfilter/seqtest.hpp"

namespace fs = std::filesystem;
using nf::Dataset;
using nf::FilteredSummary;
using nf::MethodId;
using nf::SimConfig;
using nf::SymMatrix;
using nf::TruePrecision;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

bool in_window(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string window_note(const char* label, double v, double lo, double hi) {
  return std::string(label) + " " + num(v) + (in_window(v, lo, hi) ? " in " : " NOT in ") +
         "[" + num(lo, 2) + "," + num(hi, 2) + "]";
}

// Kolmogorov-Smirnov distance of a sample against a reference CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs((i + 1) / n - f));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

TruePrecision chain_net(int p, int k) {
  nf::Graph g;
  g.p = p;
  for (int i = 0; i + 1 < p; ++i) g.edges.push_back({i, i + 1});
  g.block_of.assign(p, 0);
  return nf::build_precision(g, k, 0.8, 0.2);
}

const nf::MethodMetrics& metrics_for(const nf::EvalReport& rep, MethodId m) {
  for (const auto& mm : rep.per_method)
    if (mm.method == m) return mm;
  throw std::runtime_error("method missing from report");
}

// ---- criterion 1: single-site ranking study ----

Verdict criterion1() {
  SimConfig cfg;  // the pinned study settings
  nf::EvalReport rep = nf::run_single_target_study(
      cfg, {MethodId::MultiNf, MethodId::SingleNf, MethodId::Hotelling}, 100, 1);
  const auto& multi = metrics_for(rep, MethodId::MultiNf);
  const auto& single = metrics_for(rep, MethodId::SingleNf);
  const auto& hot = metrics_for(rep, MethodId::Hotelling);
  Verdict v;
  v.pass = in_window(multi.top_prob, 0.48, 0.64) && in_window(multi.auc, 0.87, 0.93) &&
           in_window(single.top_prob, 0.38, 0.54) && in_window(single.auc, 0.81, 0.87) &&
           in_window(hot.top_prob, 0.20, 0.36) && in_window(hot.auc, 0.72, 0.80);
  v.detail = window_note("multi top", multi.top_prob, 0.48, 0.64) + ", " +
             window_note("auc", multi.auc, 0.87, 0.93) + "; " +
             window_note("single top", single.top_prob, 0.38, 0.54) + ", " +
             window_note("auc", single.auc, 0.81, 0.87) + "; " +
             window_note("hotelling top", hot.top_prob, 0.20, 0.36) + ", " +
             window_note("auc", hot.auc, 0.72, 0.80);
  return v;
}

// ---- criterion 2: dual-site sequential study ----

Verdict criterion2() {
  SimConfig cfg;
  cfg.theta_across = 0.0;
  nf::EvalReport rep = nf::run_multi_target_study(
      cfg, {MethodId::SeqMultiNf, MethodId::MultiNf}, 100, 5, 1);
  const auto& seq = metrics_for(rep, MethodId::SeqMultiNf);
  const auto& multi = metrics_for(rep, MethodId::MultiNf);
  Verdict v;
  const bool ordering = seq.top_prob > multi.top_prob;
  v.pass = in_window(seq.top_prob, 0.69, 0.83) && in_window(seq.auc, 0.90, 0.96) &&
           in_window(multi.top_prob, 0.59, 0.73) && ordering;
  v.detail = window_note("sequential top-2", seq.top_prob, 0.69, 0.83) + ", " +
             window_note("auc", seq.auc, 0.90, 0.96) + "; " +
             window_note("plain top-2", multi.top_prob, 0.59, 0.73) +
             "; sequential > plain: " + (ordering ? "yes" : "NO");
  return v;
}

// ---- criterion 3: separated baseline study ----

Verdict criterion3() {
  SimConfig cfg;
  nf::EvalReport rep = nf::run_single_target_study(
      cfg, {MethodId::MultiNf, MethodId::SeparatedNf}, 100, 1);
  const auto& multi = metrics_for(rep, MethodId::MultiNf);
  const auto& sep = metrics_for(rep, MethodId::SeparatedNf);
  Verdict v;
  const bool ordering = sep.auc < multi.auc;
  v.pass = in_window(sep.top_prob, 0.36, 0.52) && in_window(sep.auc, 0.83, 0.89) &&
           ordering;
  v.detail = window_note("separated top", sep.top_prob, 0.36, 0.52) + ", " +
             window_note("auc", sep.auc, 0.83, 0.89) + "; separated auc " +
             num(sep.auc) + " < joint auc " + num(multi.auc) + ": " +
             (ordering ? "yes" : "NO");
  return v;
}

// ---- criterion 4: low-signal floor ----

Verdict criterion4() {
  SimConfig cfg;
  cfg.snr = 0.05;
  nf::EvalReport rep =
      nf::run_single_target_study(cfg, {MethodId::MultiNf}, 100, 1);
  const auto& multi = metrics_for(rep, MethodId::MultiNf);
  Verdict v;
  v.pass = in_window(multi.auc, 0.48, 0.58);
  v.detail = window_note("near-chance auc", multi.auc, 0.48, 0.58);
  return v;
}

// ---- criterion 5: null calibration ----

Verdict criterion5() {
  nf::Graph g = nf::sbm_graph(20, {10, 10}, 0.4, 0.2, 42);
  TruePrecision tp = nf::build_precision(g, 2, 0.8, 0.2);
  const int reps = 2000, n = 50;
  std::vector<double> stats, pvals;
  stats.reserve(reps);
  pvals.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    Dataset d = nf::sample(tp, std::nullopt, n, nf::derive_seed(1234, r),
                           nf::Condition::Case);
    FilteredSummary fs = nf::filter(d, tp.omega);
    nf::LrtResult lr = nf::lrt_statistic(fs, tp.layout.node_indices(0));
    stats.push_back(lr.statistic);
    pvals.push_back(lr.p_raw);
  }
  const double d_stat =
      ks_distance(stats, [](double x) { return nf::chisq_cdf(x, 2); });
  const double d_p = ks_distance(pvals, [](double u) { return u; });
  Verdict v;
  v.pass = d_stat < 0.05 && d_p < 0.05;
  v.detail = "statistic KS " + num(d_stat) + ", p-value KS " + num(d_p) +
             " (both must be < 0.05)";
  return v;
}

// ---- criterion 6: conditioning across a zero covariance block is inert ----

Verdict criterion6() {
  nf::Graph g;
  g.p = 6;
  g.edges = {{0, 1}, {1, 2}, {3, 4}, {4, 5}};
  g.block_of.assign(6, 0);
  TruePrecision tp = nf::build_precision(g, 2, 0.8, 0.2);
  nf::PerturbationSpec spec = nf::perturbation_from_snr(tp, {0, 4}, {0.7, 0.5});
  double worst = 0.0;
  for (int r = 0; r < 100; ++r) {
    Dataset d =
        nf::sample(tp, spec, 40, nf::derive_seed(606, r), nf::Condition::Case);
    FilteredSummary fs = nf::filter(d, tp.omega);
    for (int cand : {3, 4, 5}) {
      const double cond = nf::sequential_statistic(fs, {0}, cand);
      const double plain =
          nf::lrt_statistic(fs, tp.layout.node_indices(cand)).statistic;
      worst = std::max(worst, std::abs(cond - plain));
    }
  }
  Verdict v;
  v.pass = worst < 1e-8;
  v.detail = "max |conditional - plain| = " + num(worst, 12) + " over 100 datasets";
  return v;
}

// ---- criterion 7: expected statistic drop ----

Verdict criterion7() {
  TruePrecision tp = chain_net(5, 2);
  nf::PerturbationSpec null_cand = nf::perturbation_from_snr(tp, {1}, {0.8});
  nf::PerturbationSpec live_cand =
      nf::perturbation_from_snr(tp, {1, 3}, {0.8, 0.5});
  nf::ExpectedGainReport a = nf::expected_gain_check(tp, null_cand, {1}, 3, 5000, 50, 19);
  nf::ExpectedGainReport b = nf::expected_gain_check(tp, live_cand, {1}, 3, 5000, 50, 23);
  Verdict v;
  v.pass = a.abs_se_discrepancy <= 4.0 && b.abs_se_discrepancy <= 4.0;
  v.detail = "null candidate " + num(a.abs_se_discrepancy, 2) +
             " se (closed " + num(a.closed_form) + ", mc " + num(a.empirical_mean) +
             "); perturbed candidate " + num(b.abs_se_discrepancy, 2) + " se (closed " +
             num(b.closed_form) + ", mc " + num(b.empirical_mean) + "); both <= 4";
  return v;
}

// ---- criterion 8: statistic error distribution under a wrong precision ----

SymMatrix shifted_precision(const SymMatrix& omega, double t) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(omega.dim(), omega.dim());
  e(0, 2) = e(2, 0) = 0.035 * t;
  e(1, 3) = e(3, 1) = -0.02 * t;
  e(0, 0) = e(2, 2) = 0.025 * t;
  return SymMatrix(omega.mat() + e);
}

Verdict criterion8() {
  TruePrecision tp = chain_net(4, 2);
  SymMatrix tilde = shifted_precision(tp.omega, 1.0);
  nf::PerturbationSpec spec = nf::perturbation_from_snr(tp, {1}, {0.5});
  const int n = 50, reps = 5000, node = 0;
  nf::DiscrepancyReport rep =
      nf::discrepancy_moments(tp.omega, tilde, node, tp.layout, spec.mu, n);
  std::vector<int> idx = tp.layout.node_indices(node);
  std::vector<double> diffs;
  diffs.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    Dataset d =
        nf::sample(tp, spec, n, nf::derive_seed(808, r), nf::Condition::Case);
    const double t = nf::lrt_statistic(nf::filter(d, tp.omega), idx).statistic;
    const double tt = nf::lrt_statistic(nf::filter(d, tilde), idx).statistic;
    diffs.push_back(t - tt);
  }
  double mean = 0.0;
  for (double x : diffs) mean += x;
  mean /= reps;
  double m2 = 0.0, m4 = 0.0;
  for (double x : diffs) {
    const double c = x - mean;
    m2 += c * c;
    m4 += c * c * c * c;
  }
  m2 /= reps;
  m4 /= reps;
  const double se_mean = std::sqrt(m2 / reps);
  const double se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / reps);
  const double mean_gap = std::abs(mean - rep.mean) / se_mean;
  const double var_gap = std::abs(m2 - rep.variance) / se_var;

  // Draws from the analytic mixture of noncentral chi-squares.
  nf::NormalSampler rng(4242);
  std::vector<double> mixture(reps);
  for (int r = 0; r < reps; ++r) {
    double acc = 0.0;
    for (size_t j = 0; j < rep.eigenvalues.size(); ++j) {
      const double shift = std::sqrt(std::max(rep.noncentralities[j], 0.0));
      double q = 0.0;
      for (int c = 0; c < rep.multiplicities[j]; ++c) {
        const double z = rng.next() + (c == 0 ? shift : 0.0);
        q += z * z;
      }
      acc += rep.eigenvalues[j] * q;
    }
    mixture[r] = acc;
  }
  const double ks = ks_two_sample(diffs, mixture);

  // Scaling sweep: normalized moment ratios must stay bounded as the
  // perturbation shrinks.
  double rm1 = 0.0, rv1 = 0.0;
  bool sweep_ok = true;
  std::string sweep_note;
  for (double t : {1.0, 0.1, 0.01}) {
    auto [rm, rv] = nf::spectral_norm_bound(tp.omega, shifted_precision(tp.omega, t),
                                            node, tp.layout, spec.mu, n);
    if (t == 1.0) {
      rm1 = rm;
      rv1 = rv;
    }
    sweep_ok = sweep_ok && std::isfinite(rm) && std::isfinite(rv) &&
               rm <= 10.0 * rm1 + 1.0 && rv <= 10.0 * rv1 + 1.0;
    sweep_note += " t=" + num(t, 2) + ":(" + num(rm, 3) + "," + num(rv, 3) + ")";
  }

  Verdict v;
  v.pass = mean_gap <= 4.0 && var_gap <= 4.0 && ks < 0.05 && sweep_ok;
  v.detail = "mean gap " + num(mean_gap, 2) + " se, variance gap " + num(var_gap, 2) +
             " se, mixture KS " + num(ks) + " (< 0.05), ratio sweep" + sweep_note +
             (sweep_ok ? " bounded" : " UNBOUNDED");
  return v;
}

// ---- criterion 9: statistic form equivalences and direct maximization ----

double full_form_statistic(const FilteredSummary& fs, const std::vector<int>& group) {
  const int dim = fs.layout.dim();
  std::vector<int> rest;
  for (int i = 0; i < dim; ++i)
    if (std::find(group.begin(), group.end(), i) == group.end())
      rest.push_back(i);
  const Eigen::MatrixXd sgg = nf::submatrix(fs.sigma, group, group);
  const Eigen::MatrixXd src = nf::submatrix(fs.sigma, rest, rest);
  const Eigen::MatrixXd srg = nf::submatrix(fs.sigma, rest, group);
  Eigen::VectorXd zr(rest.size());
  for (size_t i = 0; i < rest.size(); ++i) zr(i) = fs.zbar(rest[i]);
  const Eigen::MatrixXd schur = src - srg * sgg.inverse() * srg.transpose();
  const double whole = fs.zbar.dot(fs.sigma.mat() * fs.zbar);
  return fs.n * (whole - zr.dot(schur * zr));
}

// Derivative-free simplex minimizer; the objectives here are smooth convex
// quadratics in two or three variables.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            Eigen::VectorXd start, double step, int max_iter) {
  const int d = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> x(d + 1, start);
  std::vector<double> fx(d + 1);
  for (int i = 0; i < d; ++i) x[i + 1](i) += step;
  for (int i = 0; i <= d; ++i) fx[i] = f(x[i]);
  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> ord(d + 1);
    for (int i = 0; i <= d; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    std::vector<Eigen::VectorXd> xs(d + 1);
    std::vector<double> fs2(d + 1);
    for (int i = 0; i <= d; ++i) {
      xs[i] = x[ord[i]];
      fs2[i] = fx[ord[i]];
    }
    x = xs;
    fx = fs2;
    if (std::abs(fx[d] - fx[0]) < 1e-15 * (1.0 + std::abs(fx[0]))) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += x[i];
    centroid /= d;
    Eigen::VectorXd xr = centroid + (centroid - x[d]);
    const double fr = f(xr);
    if (fr < fx[0]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - x[d]);
      const double fe = f(xe);
      if (fe < fr) {
        x[d] = xe;
        fx[d] = fe;
      } else {
        x[d] = xr;
        fx[d] = fr;
      }
    } else if (fr < fx[d - 1]) {
      x[d] = xr;
      fx[d] = fr;
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (x[d] - centroid);
      const double fc = f(xc);
      if (fc < fx[d]) {
        x[d] = xc;
        fx[d] = fc;
      } else {
        for (int i = 1; i <= d; ++i) {
          x[i] = x[0] + 0.5 * (x[i] - x[0]);
          fx[i] = f(x[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= d; ++i)
    if (fx[i] < fx[best]) best = i;
  return x[best];
}

FilteredSummary random_summary(int p, int k, int n, std::uint64_t seed) {
  nf::NormalSampler rng(seed);
  const int dim = p * k;
  Eigen::MatrixXd b(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) b(i, j) = 0.4 * rng.next();
  SymMatrix omega(b * b.transpose() + Eigen::MatrixXd::Identity(dim, dim));
  Eigen::MatrixXd rows(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) rows(i, j) = rng.next() + 0.2;
  Dataset d;
  d.layout = nf::make_layout(p, k);
  d.samples = rows;
  return nf::filter(d, omega);
}

Verdict criterion9() {
  // (a) the simplified group statistic and the full quadratic-difference
  // form agree on random instances.
  double worst_rel = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const int p = 2 + s % 4;
    const int k = 1 + s % 3;
    FilteredSummary fs = random_summary(p, k, 15 + s % 20, 90000 + s);
    const std::vector<int> group = fs.layout.node_indices(s % p);
    const nf::LrtResult lr = nf::lrt_statistic(fs, group, true);
    const double full = full_form_statistic(fs, group);
    const double rel = std::abs(lr.statistic - full) /
                       std::max({std::abs(lr.statistic), std::abs(full), 1e-12});
    worst_rel = std::max(worst_rel, rel);
  }

  // (b, c) the statistic equals twice the likelihood gain found by direct
  // numerical maximization, and the maximizer matches the closed-form mean.
  double worst_stat = 0.0, worst_coord = 0.0;
  for (int s = 0; s < 50; ++s) {
    FilteredSummary fs = random_summary(3, 2, 30, 70000 + s);
    const std::vector<int> group = fs.layout.node_indices(1);
    const nf::LrtResult lr = nf::lrt_statistic(fs, group);
    const Eigen::MatrixXd sigma = fs.sigma.mat();
    const Eigen::VectorXd zbar = fs.zbar;
    auto neg_gain = [&](const Eigen::VectorXd& m) {
      Eigen::VectorXd mu = Eigen::VectorXd::Zero(6);
      for (size_t i = 0; i < group.size(); ++i) mu(group[i]) = m(i);
      const Eigen::VectorXd r = zbar - mu;
      return r.dot(sigma * r);
    };
    const Eigen::VectorXd mhat =
        nelder_mead(neg_gain, Eigen::VectorXd::Zero(2), 0.5, 4000);
    const double t_numeric =
        fs.n * (zbar.dot(sigma * zbar) - neg_gain(mhat));
    worst_stat = std::max(worst_stat, std::abs(t_numeric - lr.statistic));
    const Eigen::VectorXd closed = nf::mu_mle(fs, group);
    worst_coord = std::max(worst_coord, (mhat - closed).cwiseAbs().maxCoeff());
  }

  Verdict v;
  v.pass = worst_rel <= 1e-8 && worst_stat <= 1e-4 && worst_coord <= 1e-4;
  v.detail = "form agreement max rel " + num(worst_rel, 12) +
             " (<= 1e-8); maximization gap max " + num(worst_stat, 8) +
             " (<= 1e-4); maximizer coordinate gap max " + num(worst_coord, 8) +
             " (<= 1e-4)";
  return v;
}

// ---- criterion 10: solver fuzz ----

Verdict criterion10() {
  nf::NormalSampler rng(5150);
  int bad = 0;
  std::string first_bad;
  for (int s = 0; s < 500; ++s) {
    const int p = 2 + static_cast<int>(rng.uniform_int(4));
    const int k = 1 + static_cast<int>(rng.uniform_int(3));
    const int dim = p * k;
    const int n = 10 + static_cast<int>(rng.uniform_int(51));
    Eigen::MatrixXd rows(n, dim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < dim; ++j) rows(i, j) = rng.next();
    Dataset d;
    d.layout = nf::make_layout(p, k);
    d.samples = rows;
    const SymMatrix cov = nf::sample_covariance(d);
    double lambda_max = 0.0;
    for (int a = 0; a < p; ++a)
      for (int b = a + 1; b < p; ++b)
        lambda_max =
            std::max(lambda_max, cov.mat().block(a * k, b * k, k, k).norm());
    const bool at_ceiling = s % 10 == 0;
    const double lambda =
        at_ceiling ? lambda_max * 1.0001
                   : lambda_max * (0.02 + 1.18 * rng.uniform());
    nf::SolveOptions opt;
    opt.max_iter = 300;
    try {
      nf::EstimationResult r = nf::block_glasso(
          cov, d.layout, lambda, nf::PenaltyWeights::uniform(p), opt);
      bool ok = !r.objective_trace.empty();
      for (size_t i = 1; i < r.objective_trace.size(); ++i)
        ok = ok && r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-10;
      nf::cholesky(r.omega_hat);  // throws when an iterate left the PD cone
      ok = ok && (r.omega_hat.mat() - r.omega_hat.mat().transpose())
                         .cwiseAbs()
                         .maxCoeff() == 0.0;
      if (at_ceiling) ok = ok && r.edge_set.empty();
      for (const auto& e : r.edge_set)
        ok = ok &&
             r.omega_hat.mat().block(e.first * k, e.second * k, k, k).norm() > 1e-8;
      if (!ok) {
        ++bad;
        if (first_bad.empty())
          first_bad = " first failure at solve " + std::to_string(s);
      }
    } catch (const nf::Error& e) {
      ++bad;
      if (first_bad.empty())
        first_bad = std::string(" solve ") + std::to_string(s) + " threw: " + e.what();
    }
  }
  // Unpenalized identity-covariance fit returns the identity.
  nf::SolveOptions tight;
  tight.tol = 1e-10;
  nf::EstimationResult id = nf::block_glasso(SymMatrix::identity(4),
                                             nf::make_layout(4, 1), 0.0,
                                             nf::PenaltyWeights::uniform(4), tight);
  const double id_gap =
      (id.omega_hat.mat() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff();
  Verdict v;
  v.pass = bad == 0 && id_gap < 1e-6;
  v.detail = std::to_string(500 - bad) +
             "/500 fuzz solves monotone, PD and consistent;" + first_bad +
             " identity-fit gap " + num(id_gap, 9);
  return v;
}

// ---- criterion 11 and the end-to-end workflow: CLI level ----

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(NETFILTER_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return status < 0 ? -1 : (status >> 8) & 0xff;
}

std::map<std::string, std::string> snapshot(const std::string& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file())
      files[fs::relative(entry.path(), dir).string()] =
          nf::read_text_file(entry.path().string());
  return files;
}

struct CliFixture {
  std::string dir;
  TruePrecision tp;
  int site = 1;
};

CliFixture make_fixture(const std::string& tag) {
  CliFixture f;
  f.dir = (fs::temp_directory_path() / tag).string();
  fs::remove_all(f.dir);
  fs::create_directories(f.dir);
  nf::Graph g = nf::sbm_graph(4, {2, 2}, 0.6, 0.3, 11);
  f.tp = nf::build_precision(g, 2, 0.8, 0.2);
  Dataset control = nf::sample(f.tp, std::nullopt, 40, 21, nf::Condition::Control);
  Dataset cases = nf::sample(f.tp, nf::perturbation_from_snr(f.tp, {f.site}, {1.0}),
                             30, 22, nf::Condition::Case);
  nf::write_matrix_csv(f.dir + "/control.csv", control.samples,
                       nf::flat_names(control.layout), "control samples");
  nf::write_matrix_csv(f.dir + "/case.csv", cases.samples,
                       nf::flat_names(cases.layout), "case samples");
  nf::write_matrix_csv(f.dir + "/omega.csv", f.tp.omega.mat(),
                       nf::flat_names(f.tp.layout), "precision");
  nf::write_matrix_csv(f.dir + "/tilde.csv",
                       shifted_precision(f.tp.omega, 1.0).mat(),
                       nf::flat_names(f.tp.layout), "perturbed precision");
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(1, 8);
  mu(0, 2) = 0.5;
  mu(0, 3) = 0.3;
  nf::write_matrix_csv(f.dir + "/mu.csv", mu, nf::flat_names(f.tp.layout),
                       "perturbation mean");
  return f;
}

Verdict criterion11() {
  CliFixture f = make_fixture("nf_acceptance_rerun");
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"estimate", "estimate --control " + f.dir + "/control.csv --p 4 --k 2 " +
                       "--lambdas 6 --out " + f.dir + "/est"},
      {"rank", "rank --case " + f.dir + "/case.csv --omega " + f.dir +
                   "/omega.csv --p 4 --k 2 --out " + f.dir + "/rank"},
      {"sequential", "sequential --case " + f.dir + "/case.csv --omega " + f.dir +
                         "/omega.csv --p 4 --k 2 --alpha 0.1 --max-steps 3 --out " +
                         f.dir + "/seq"},
      {"cv", "cv --case " + f.dir + "/case.csv --control " + f.dir +
                 "/control.csv --p 4 --k 2 --folds 4 --lambdas 6 --seed 3 --out " +
                 f.dir + "/cv"},
      {"accuracy", "accuracy --omega " + f.dir + "/omega.csv --omega-tilde " +
                       f.dir + "/tilde.csv --p 4 --k 2 --node 1 --mu " + f.dir +
                       "/mu.csv --n 40 --out " + f.dir + "/acc"},
      {"simulate", "simulate --preset single-target --p 6 --k 2 --blocks 3,3 " +
                       std::string("--theta-within 0.5 --theta-across 0.2 --snr 0.8 ") +
                       "--n 30 --lambdas 6 --networks 2 --seed 4 --out " + f.dir +
                       "/sim"}};
  Verdict v;
  std::string stable, unstable;
  for (const auto& [name, args] : runs) {
    if (run_cli(args) != 0) {
      v.pass = false;
      unstable += " " + name + "(run1 failed)";
      continue;
    }
    const std::string out_dir = f.dir + "/" +
                                (name == "estimate"   ? "est"
                                 : name == "rank"     ? "rank"
                                 : name == "sequential" ? "seq"
                                 : name == "cv"       ? "cv"
                                 : name == "accuracy" ? "acc"
                                                      : "sim");
    const auto first = snapshot(out_dir);
    if (run_cli(args) != 0) {
      v.pass = false;
      unstable += " " + name + "(run2 failed)";
      continue;
    }
    if (snapshot(out_dir) == first && !first.empty())
      stable += " " + name;
    else {
      v.pass = false;
      unstable += " " + name;
    }
  }
  v.detail = "byte-identical reruns:" + stable +
             (unstable.empty() ? "" : "; differing or failing:" + unstable);
  return v;
}

std::string tsv_field(const std::string& text, int line, int column) {
  std::istringstream in(text);
  std::string row;
  for (int l = 0; l <= line; ++l)
    if (!std::getline(in, row)) return "";
  std::istringstream cells(row);
  std::string cell;
  for (int c = 0; c <= column; ++c)
    if (!std::getline(cells, cell, '\t')) return "";
  return cell;
}

nlohmann::json parse_output_json(const std::string& path) {
  std::string text = nf::read_text_file(path);
  const size_t nl = text.find('\n');
  if (nl != std::string::npos && text.rfind("//", 0) == 0) text = text.substr(nl + 1);
  return nlohmann::json::parse(text);
}

Verdict end_to_end() {
  const std::string dir = (fs::temp_directory_path() / "nf_acceptance_e2e").string();
  fs::remove_all(dir);
  fs::create_directories(dir);
  nf::Graph g = nf::sbm_graph(10, {5, 5}, 0.4, 0.2, 2026);
  TruePrecision tp = nf::build_precision(g, 2, 0.8, 0.2);
  const int site = 3;  // reported 1-based as node 4
  Dataset control = nf::sample(tp, std::nullopt, 200, 31, nf::Condition::Control);
  Dataset cases = nf::sample(tp, nf::perturbation_from_snr(tp, {site}, {1.2}),
                             120, 32, nf::Condition::Case);
  nf::write_matrix_csv(dir + "/control.csv", control.samples,
                       nf::flat_names(control.layout), "synthetic controls");
  nf::write_matrix_csv(dir + "/case.csv", cases.samples,
                       nf::flat_names(cases.layout), "synthetic cases");

  Verdict v;
  std::string steps;
  if (run_cli("estimate --control " + dir + "/control.csv --p 10 --k 2 " +
              "--lambdas 20 --out " + dir + "/est") != 0) {
    v.pass = false;
    v.detail = "estimate step failed";
    return v;
  }
  steps += "estimate";
  const std::string omega_path = dir + "/est/omega_hat.csv";
  if (run_cli("rank --case " + dir + "/case.csv --omega " + omega_path +
              " --p 10 --k 2 --out " + dir + "/rank") != 0) {
    v.pass = false;
    v.detail = "rank step failed";
    return v;
  }
  steps += " -> rank";
  if (run_cli("sequential --case " + dir + "/case.csv --omega " + omega_path +
              " --p 10 --k 2 --alpha 0.05 --max-steps 3 --out " + dir + "/seq") != 0) {
    v.pass = false;
    v.detail = "sequential step failed";
    return v;
  }
  steps += " -> sequential";
  if (run_cli("cv --case " + dir + "/case.csv --control " + dir +
              "/control.csv --p 10 --k 2 --folds 5 --lambdas 10 --seed 17 --out " +
              dir + "/cv") != 0) {
    v.pass = false;
    v.detail = "cv step failed";
    return v;
  }
  steps += " -> cv";

  // Every emitted table starts with the tool header; JSON carries it as a
  // comment line.
  const std::string rank_tsv = nf::read_text_file(dir + "/rank/ranking.tsv");
  const bool headers_ok =
      rank_tsv.rfind("# netfilter", 0) == 0 &&
      nf::read_text_file(dir + "/seq/sequential.json").rfind("// netfilter", 0) == 0;

  // Row 2 is the top-ranked node (row 0 comment, row 1 column names).
  const std::string top_rank_node = tsv_field(rank_tsv, 2, 1);
  const std::string top_cv_node =
      tsv_field(nf::read_text_file(dir + "/cv/cv.tsv"), 2, 1);
  nlohmann::json seq = parse_output_json(dir + "/seq/sequential.json");
  const bool seq_found = !seq["selection_order"].empty() &&
                         seq["selection_order"][0].get<int>() == site + 1;
  v.pass = headers_ok && top_rank_node == "4" && top_cv_node == "4" && seq_found;
  v.detail = steps + "; ranked node " + top_rank_node +
             ", sequential first pick " +
             (seq["selection_order"].empty()
                  ? std::string("none")
                  : std::to_string(seq["selection_order"][0].get<int>())) +
             ", cv top node " + top_cv_node + " (true site node 4); headers " +
             (headers_ok ? "ok" : "MISSING");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted;
  if (argc <= 1) {
    for (int i = 1; i <= 11; ++i) wanted.push_back(std::to_string(i));
    wanted.push_back("e2e");
  } else {
    for (int i = 1; i < argc; ++i) wanted.push_back(argv[i]);
  }
  int failures = 0;
  for (const std::string& which : wanted) {
    Verdict v;
    std::string label = "criterion " + which;
    try {
      if (which == "1") v = criterion1();
      else if (which == "2") v = criterion2();
      else if (which == "3") v = criterion3();
      else if (which == "4") v = criterion4();
      else if (which == "5") v = criterion5();
      else if (which == "6") v = criterion6();
      else if (which == "7") v = criterion7();
      else if (which == "8") v = criterion8();
      else if (which == "9") v = criterion9();
      else if (which == "10") v = criterion10();
      else if (which == "11") v = criterion11();
      else if (which == "e2e") {
        label = "e2e";
        v = end_to_end();
      } else {
        std::fprintf(stderr, "unknown selector: %s\n", which.c_str());
        return 64;
      }
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("threw: ") + e.what();
    }
    std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", label.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
