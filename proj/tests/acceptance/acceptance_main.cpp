// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.
// Usage: psmc_acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "psmc/experiment.hpp"

using namespace psmc;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vector json_vector(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

// Every density panel produced by an experiment run, kept for the normalization check.
std::vector<DensityEstimate> g_panels;

ExperimentResult run(const json& doc) {
  ExperimentResult r = run_experiment(config_from_json(doc));
  for (const auto& p : r.densities) {
    g_panels.push_back(p.estimate);
    g_panels.push_back(p.reference);
  }
  return r;
}

const ResultRow& row(const ExperimentResult& r, int K, const std::string& method) {
  const ResultRow* found = r.table.find(K, method);
  if (found == nullptr) throw Error("missing result row K=" + std::to_string(K) + " " + method);
  if (!found->ok) throw Error(method + " failed: " + found->error);
  return *found;
}

json bernoulli_doc(double p) {
  return {{"schema_version", 1}, {"example", "bernoulli"},      {"N", 100000},
          {"K", {50}},           {"combiners", {"AR", "CMC"}},  {"true_params", {p}},
          {"draws", 100000},     {"burn_in", 0},                {"data_seed", 11},
          {"shard_seed", 12},    {"chain_seed", 13}};
}

Outcome beta_bernoulli_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult r = run(bernoulli_doc(0.1));
  const double secs = seconds_since(t0);
  const double ar = row(r, 50, "AR").total_l2;
  const double cmc = row(r, 50, "CMC").total_l2;
  return {ar <= 5e-4 && ar <= cmc && secs < 120.0,
          "AR L2 " + fmt(ar) + " (bar 5e-4), CMC L2 " + fmt(cmc) + ", " + fmt(secs) + " s"};
}

Outcome rare_event_ordering() {
  const ExperimentResult r = run(bernoulli_doc(0.001));
  const double ar = row(r, 50, "AR").total_l2;
  const double cmc = row(r, 50, "CMC").total_l2;
  return {5.0 * ar <= cmc,
          "AR L2 " + fmt(ar) + ", CMC L2 " + fmt(cmc) + ", ratio " + fmt(cmc / ar) + " (bar 5)"};
}

Outcome gaussian_model() {
  const json doc = {{"schema_version", 1},
                    {"example", "gaussian"},
                    {"N", 100000},
                    {"K", {20}},
                    {"combiners", {"AR"}},
                    {"burn_in", 5000},
                    {"draws", 200000},
                    {"thin", 5},
                    {"reference_burn_in", 5000},
                    {"reference_draws", 2000000},
                    {"reference_thin", 5},
                    {"data_seed", 31},
                    {"shard_seed", 32},
                    {"chain_seed", 33},
                    {"reference_seed", 34}};
  const ExperimentResult r = run(doc);
  const ResultRow& ar = row(r, 20, "AR");
  const json& check = r.metadata["per_K"][0]["fisher_check"];
  if (check.contains("error")) return {false, "Fisher check failed: " + check["error"].get<std::string>()};
  const double disc = check["scaled_vs_info"].get<double>();
  std::ostringstream d;
  d << "AR L2 " << fmt(ar.total_l2) << " (bar 2e-3; mu " << fmt(ar.per_marginal[0]) << ", sigma2 "
    << fmt(ar.per_marginal[1]) << "), N cov vs I^-1 " << fmt(100 * disc) << "% (bar 15%)";
  return {ar.total_l2 <= 2e-3 && disc <= 0.15, d.str()};
}

Outcome logistic_model() {
  const json doc = {{"schema_version", 1},
                    {"example", "logistic"},
                    {"N", 20000},
                    {"K", {20}},
                    {"combiners", {"AR", "AR+NR"}},
                    {"burn_in", 5000},
                    {"draws", 20000},
                    {"reference_burn_in", 5000},
                    {"reference_draws", 50000},
                    {"newton_iters", 5},
                    {"newton_tol", 1e-12},
                    {"data_seed", 41},
                    {"shard_seed", 42},
                    {"chain_seed", 43},
                    {"reference_seed", 44}};
  const ExperimentResult r = run(doc);
  row(r, 20, "AR");
  row(r, 20, "AR+NR");
  const json& k = r.metadata["per_K"][0];
  const Vector ref_mean = json_vector(r.metadata["reference"]["mean"]);
  const Vector ref_sd = json_vector(r.metadata["reference"]["sd"]);
  const Vector plain = json_vector(k["common_center"]);
  const json& iterates = k["newton"]["iterates"];
  const Vector refined = json_vector(iterates[iterates.size() - 1]);

  // gradient of the full-data log posterior (flat prior) at the refined center, recomputed here
  const ExperimentConfig config = config_from_json(doc);
  GeneratorSpec spec = default_spec(ExampleId::Logistic, config.N, config.data_seed);
  const Dataset data = generate(spec);
  LogisticModel model(5);
  const double grad =
      (model.sum_grad_log_lik(refined, data.rows) + model.grad_log_prior(refined)).norm();

  const double z_refined = ((refined - ref_mean).array() / ref_sd.array()).abs().maxCoeff();
  const double z_plain = ((plain - ref_mean).array() / ref_sd.array()).abs().maxCoeff();
  std::ostringstream d;
  d << "max |mean - ref| / ref sd: recentred at the 5-step Newton center " << fmt(z_refined)
    << ", at the average of shard means " << fmt(z_plain) << " (bar 3); |grad| " << fmt(grad)
    << " (bar 1e-6)";
  return {z_refined <= 3.0 && grad < 1e-6, d.str()};
}

Outcome mixture_model() {
  const json doc = {{"schema_version", 1},
                    {"example", "mixture"},
                    {"N", 100000},
                    {"K", {20}},
                    {"combiners", {"AR"}},
                    {"burn_in", 1000},
                    {"draws", 20000},
                    {"reference_burn_in", 2000},
                    {"reference_draws", 200000},
                    {"data_seed", 51},
                    {"shard_seed", 52},
                    {"chain_seed", 53},
                    {"reference_seed", 54}};
  const ExperimentResult r = run(doc);
  const ResultRow& ar = row(r, 20, "AR");
  const Vector m = json_vector(r.metadata["per_K"][0]["common_center"]);
  const bool means = std::abs(m[0] - 2.0) <= 0.05 * 2.0 && std::abs(m[1] - 5.0) <= 0.05 * 5.0 &&
                     std::abs(m[4] - 0.05) <= 0.01;
  bool l2 = true;
  std::ostringstream d;
  d << "AR means alpha " << fmt(m[0]) << ", beta " << fmt(m[1]) << ", p " << fmt(m[4])
    << "; per-marginal L2 (bar 5e-2):";
  for (std::size_t j = 0; j < ar.per_marginal.size(); ++j) {
    d << " " << r.table.parameter_names[j] << " " << fmt(ar.per_marginal[j]);
    l2 = l2 && ar.per_marginal[j] <= 5e-2;
  }
  return {means && l2, d.str()};
}

double normal_pdf(double x, double m) {
  return std::exp(-0.5 * (x - m) * (x - m)) / std::sqrt(2.0 * std::numbers::pi);
}

Outcome exact_formulas() {
  double worst = 0.0;
  Matrix I = Matrix::Identity(2, 2);
  worst = std::max(worst, std::abs(gaussian_kl(Vector::Zero(2), Vector::Zero(2), I)));
  Vector e1 = Vector::Zero(2);
  e1[0] = 1.0;
  worst = std::max(worst, std::abs(gaussian_kl(e1, Vector::Zero(2), I) - 0.5));
  Matrix S(3, 3);
  S << 2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5;
  Vector a(3);
  Vector b(3);
  a << 0.4, -1.0, 2.0;
  b << -0.3, 0.5, 1.5;
  const Vector diff = a - b;
  worst = std::max(worst, std::abs(gaussian_kl(a, b, S) - 0.5 * diff.dot(S.ldlt().solve(diff))));
  for (double kl : {0.0, 0.25, 0.7, 3.0}) {
    worst = std::max(worst, std::abs(tv_bound_from_kl(kl) - 2.0 * std::sqrt(kl)));
  }
  const AnalyticMarginal n0{[](double x) { return normal_pdf(x, 0.0); }, -10.0, 10.0};
  const AnalyticMarginal n1{[](double x) { return normal_pdf(x, 1.0); }, -9.0, 11.0};
  const double l2 = l2_analytic(n0, n1);

  // KDE normalization across every panel produced above plus fresh samples
  Rng rng(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int n : {100, 10000, 1000000}) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = nd(rng);
    g_panels.push_back(kde_1d(xs));
  }
  double norm_err = 0.0;
  for (const auto& p : g_panels) norm_err = std::max(norm_err, std::abs(p.integral() - 1.0));

  std::ostringstream d;
  d << "KL/TV max error " << fmt(worst) << " (bar 1e-12); L2 N(0,1) vs N(1,1) " << l2
    << " (0.12477 +- 1e-3); KDE normalization max error " << fmt(norm_err) << " over "
    << g_panels.size() << " estimates (bar 1e-3)";
  return {worst <= 1e-12 && std::abs(l2 - 0.12477) <= 1e-3 && norm_err <= 1e-3, d.str()};
}

Outcome structural_invariants() {
  std::vector<std::string> failed;
  const Dataset data = generate(default_spec(ExampleId::Gaussian, 20000, 61));
  GaussianModel model;
  RwmConfig cfg;
  cfg.total_iters = 6000;
  cfg.burn_in = 1000;
  const ShardChainFn fn = rwm_chain(model, cfg, SubposteriorKind::Rescaled);

  // K=1 identity
  const auto one = run_subposteriors(fn, make_shards(data, 1, 1), {5, 1});
  if (!(combine_ar(one).draws == one.chains[0].draws)) failed.push_back("AR K=1 identity");
  if ((combine_cmc(one).draws - one.chains[0].draws).cwiseAbs().maxCoeff() > 1e-12) {
    failed.push_back("CMC K=1 identity");
  }

  // recentring and rigid shift
  const auto shards = make_shards(data, 10, 2);
  const auto sub = run_subposteriors(fn, shards, {6, 1});
  const CombinedSample ar = combine_ar(sub);
  const double grand = (ar.draws.colwise().mean().transpose() - common_center(sub)).cwiseAbs().maxCoeff();
  if (grand > 1e-10) failed.push_back("recentring identity (" + fmt(grand) + ")");
  double cov_err = 0.0;
  for (std::size_t i = 0; i < sub.chains.size(); ++i) {
    ChainDraws shifted;
    shifted.draws = ar.draws.middleRows(ar.chain_offsets[i], sub.chains[i].size());
    cov_err = std::max(cov_err,
                       (shifted.covariance() - sub.chains[i].covariance()).cwiseAbs().maxCoeff());
  }
  if (cov_err > 1e-12) failed.push_back("covariance preservation (" + fmt(cov_err) + ")");

  // parallel and sequential shard runs
  const auto par = run_subposteriors(fn, shards, {6, 4});
  for (std::size_t i = 0; i < sub.chains.size(); ++i) {
    if (!(par.chains[i].draws == sub.chains[i].draws)) {
      failed.push_back("parallel/sequential shard " + std::to_string(i));
      break;
    }
  }

  // full experiment re-run
  const json doc = {{"schema_version", 1},        {"example", "logistic"}, {"N", 4000},
                    {"K", {4, 8}},               {"combiners", {"AR", "AR+NR", "CMC"}},
                    {"burn_in", 1000},           {"draws", 3000},         {"reference_burn_in", 1000},
                    {"reference_draws", 5000},   {"workers", 0}};
  const ExperimentResult r1 = run_experiment(config_from_json(doc));
  const ExperimentResult r2 = run_experiment(config_from_json(doc));
  bool same = r1.table.to_csv(false) == r2.table.to_csv(false) &&
              r1.densities.size() == r2.densities.size();
  for (std::size_t i = 0; same && i < r1.densities.size(); ++i) {
    same = r1.densities[i].estimate.values == r2.densities[i].estimate.values;
  }
  if (!same) failed.push_back("experiment re-run determinism");
  if (!r1.table.all_ok()) failed.push_back("determinism run had failed cells");

  std::string d = "K=1 identity, recentring (" + fmt(grand) + "), covariance (" + fmt(cov_err) +
                  "), parallel/sequential, re-run determinism";
  if (!failed.empty()) {
    d += "; failed:";
    for (const auto& f : failed) d += " " + f + ";";
  }
  return {failed.empty(), d};
}

Outcome covariance_trend() {
  const int K = 50;
  const int reps = 20;
  BernoulliModel model;
  std::vector<double> mean;
  std::vector<double> se;
  for (Eigen::Index N : {1000, 10000, 100000}) {
    std::vector<double> d;
    for (int rep = 0; rep < reps; ++rep) {
      const Dataset data = generate(default_spec(ExampleId::Bernoulli, N, 1000 + rep));
      const auto shards = make_shards(data, K, 2000 + rep);
      const auto sub = run_subposteriors(beta_chain(model, 10000, SubposteriorKind::Rescaled),
                                         shards, {static_cast<Seed>(3000 + 100 * rep), 1});
      const CombinedSample ar = combine_ar(sub);
      d.push_back(fisher_covariance_check(model, sub, shards, ar, N).scaled_vs_info);
    }
    double m = 0.0;
    for (double x : d) m += x;
    m /= reps;
    double v = 0.0;
    for (double x : d) v += (x - m) * (x - m);
    mean.push_back(m);
    se.push_back(std::sqrt(v / (reps - 1) / reps));
  }
  bool pass = true;
  std::ostringstream d;
  d << "mean relative discrepancy over " << reps << " replicates:";
  const char* names[] = {"1e3", "1e4", "1e5"};
  for (std::size_t i = 0; i < mean.size(); ++i) {
    d << " N=" << names[i] << " " << fmt(mean[i]) << " (se " << fmt(se[i]) << ")";
    if (i > 0) pass = pass && mean[i] <= mean[i - 1] + 2.0 * std::hypot(se[i], se[i - 1]);
  }
  return {pass, d.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "Beta-Bernoulli oracle", beta_bernoulli_oracle},
      {2, "Rare-event ordering", rare_event_ordering},
      {3, "Gaussian model", gaussian_model},
      {4, "Logistic model", logistic_model},
      {5, "Mixture model", mixture_model},
      {6, "Exact formulas", exact_formulas},
      {7, "Structural invariants", structural_invariants},
      {8, "Covariance trend", covariance_trend},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only.count(c.id) == 0) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " C" << c.id << " " << c.name << ": " << o.detail
              << " [" << fmt(seconds_since(t0)) << " s]" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
