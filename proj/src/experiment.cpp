#include "psmc/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace psmc {

using nlohmann::json;

namespace {

/// CMC chains use their own seed block so they never reuse a recentring chain's stream.
constexpr Seed kStandardSeedOffset = 1'000'000;

std::string fmt(double x) {
  if (!std::isfinite(x)) return "NA";
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_or_null(m(i, j)));
    out.push_back(row);
  }
  return out;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_or_null(v(i)));
  return out;
}

Matrix reported(const ModelSpec& model, const Matrix& draws) {
  if (draws.rows() == 0) return draws;
  const Vector first = model.to_reported(draws.row(0).transpose());
  Matrix out(draws.rows(), first.size());
  out.row(0) = first.transpose();
  for (Eigen::Index t = 1; t < draws.rows(); ++t) {
    out.row(t) = model.to_reported(draws.row(t).transpose()).transpose();
  }
  return out;
}

std::unique_ptr<ModelSpec> make_model(const ExperimentConfig& c, int features) {
  switch (c.example) {
    case ExampleId::Gaussian: return std::make_unique<GaussianModel>();
    case ExampleId::Logistic: return std::make_unique<LogisticModel>(features);
    case ExampleId::Bernoulli: return std::make_unique<BernoulliModel>(c.prior_a0, c.prior_b0);
    case ExampleId::Mixture: return std::make_unique<MixtureModel>(c.hyper);
  }
  throw ConfigurationError("unhandled example");
}

struct Reference {
  /// Reported-coordinate draws, or analytic marginals when draws is empty.
  Matrix draws;
  std::vector<AnalyticMarginal> analytic;
  json info;
};

int total_iters(int burn_in, int draws, int thin) { return burn_in + draws * thin; }

ShardChainFn chain_for(const ExperimentConfig& c, const ModelSpec& model, SubposteriorKind kind,
                       int burn_in, int draws, int thin) {
  switch (c.example) {
    case ExampleId::Gaussian:
    case ExampleId::Logistic: {
      RwmConfig cfg;
      cfg.total_iters = total_iters(burn_in, draws, thin);
      cfg.burn_in = burn_in;
      cfg.thin = thin;
      return rwm_chain(model, cfg, kind);
    }
    case ExampleId::Mixture: {
      GibbsConfig cfg;
      cfg.total_iters = total_iters(burn_in, draws, thin);
      cfg.burn_in = burn_in;
      cfg.thin = thin;
      cfg.init = c.mixture_init;
      return gibbs_chain(c.hyper, cfg, kind);
    }
    case ExampleId::Bernoulli:
      return beta_chain(static_cast<const BernoulliModel&>(model), draws, kind);
  }
  throw ConfigurationError("unhandled example");
}

Vector column_sd(const Matrix& draws) {
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const double n = static_cast<double>(draws.rows());
  return ((draws.rowwise() - mean).colwise().squaredNorm() / std::max(1.0, n - 1.0))
      .cwiseSqrt()
      .transpose();
}

Reference make_reference(const ExperimentConfig& c, const ModelSpec& model, const Dataset& data) {
  Reference ref;
  if (c.example == ExampleId::Bernoulli) {
    const double s = data.rows.col(0).sum();
    const dist::Beta post{c.prior_a0 + s, c.prior_b0 + static_cast<double>(data.n()) - s};
    const double sd = std::sqrt(post.variance());
    ref.analytic.push_back({[post](double x) {
                              if (x <= 0.0 || x >= 1.0) return 0.0;
                              return std::exp(dist::beta_log_pdf(x, post.a, post.b));
                            },
                            std::max(0.0, post.mean() - 12.0 * sd),
                            std::min(1.0, post.mean() + 12.0 * sd)});
    ref.info = {{"kind", "analytic"}, {"a", post.a}, {"b", post.b}};
    return ref;
  }
  const DataShard full = make_shard(data.rows, 1, 0);
  const ShardChainFn chain = chain_for(c, model, SubposteriorKind::Rescaled, c.reference_burn_in,
                                       c.reference_draws, c.reference_thin);
  const auto start = std::chrono::steady_clock::now();
  const ChainDraws draws = chain(full, c.reference_seed);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ref.draws = reported(model, draws.draws);
  ref.info = {{"kind", c.example == ExampleId::Mixture ? "gibbs" : "random_walk"},
              {"seed", c.reference_seed},
              {"burn_in", c.reference_burn_in},
              {"draws", c.reference_draws},
              {"thin", c.reference_thin},
              {"acceptance_rate", draws.acceptance_rate},
              {"mean", vector_json(ref.draws.colwise().mean().transpose())},
              {"sd", vector_json(column_sd(ref.draws))},
              {"warnings", draws.warnings},
              {"seconds", seconds}};
  return ref;
}

void fill_acceptance(ResultRow& row, const SubposteriorResult& sub) {
  double sum = 0.0;
  double lo = 1.0;
  for (const auto& ch : sub.chains) {
    sum += ch.acceptance_rate;
    lo = std::min(lo, ch.acceptance_rate);
    for (const auto& w : ch.warnings) {
      row.warnings.push_back("shard " + std::to_string(ch.shard_index) + ": " + w);
    }
  }
  row.acceptance_mean = sub.chains.empty() ? 0.0 : sum / static_cast<double>(sub.chains.size());
  row.acceptance_min = sub.chains.empty() ? 0.0 : lo;
}

json newton_json(const NewtonResult& r) {
  json iterates = json::array();
  for (const auto& v : r.trace.iterates) iterates.push_back(vector_json(v));
  return {{"status", to_string(r.status)},
          {"iterations", static_cast<int>(r.trace.iterates.size()) - 1},
          {"gradient_norms", r.trace.gradient_norms},
          {"iterates", iterates},
          {"condition", number_or_null(r.condition)},
          {"message", r.message}};
}

json check_json(const CheckReport& r) {
  return {{"scaled_cov", matrix_json(r.scaled_cov)},
          {"avg_inverse_info", matrix_json(r.avg_inverse_info)},
          {"inverse_info", matrix_json(r.inverse_info)},
          {"analytic_info", r.analytic_info},
          {"scaled_vs_avg", r.scaled_vs_avg},
          {"scaled_vs_info", r.scaled_vs_info},
          {"avg_vs_info", r.avg_vs_info}};
}

std::string file_safe(std::string s) {
  for (char& ch : s) {
    if (ch == '+') ch = '-';
  }
  return s;
}

}  // namespace

const ResultRow* ResultTable::find(int K, const std::string& method) const {
  for (const auto& r : rows) {
    if (r.K == K && r.method == method) return &r;
  }
  return nullptr;
}

bool ResultTable::all_ok() const {
  for (const auto& r : rows) {
    if (!r.ok) return false;
  }
  return true;
}

std::string ResultTable::to_csv(bool include_timing) const {
  std::ostringstream os;
  os << "K,method,status,total_l2";
  for (const auto& name : parameter_names) os << ",l2_" << name;
  os << ",joint_l2";
  if (include_timing) os << ",seconds";
  os << ",acceptance_mean,acceptance_min,warnings,error\n";
  auto quoted = [](const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + '"';
  };
  for (const auto& r : rows) {
    os << r.K << ',' << r.method << ',' << (r.ok ? "ok" : "failed") << ','
       << (r.ok ? fmt(r.total_l2) : "NA");
    for (std::size_t j = 0; j < parameter_names.size(); ++j) {
      os << ',' << (r.ok && j < r.per_marginal.size() ? fmt(r.per_marginal[j]) : "NA");
    }
    os << ',' << (r.joint_l2 ? fmt(*r.joint_l2) : "NA");
    if (include_timing) os << ',' << fmt(r.seconds);
    os << ',' << fmt(r.acceptance_mean) << ',' << fmt(r.acceptance_min) << ',';
    std::string joined;
    for (std::size_t i = 0; i < r.warnings.size(); ++i) {
      joined += (i ? "; " : "") + r.warnings[i];
    }
    os << quoted(joined) << ',' << quoted(r.error) << '\n';
  }
  return os.str();
}

json ResultTable::to_json(bool include_timing) const {
  json out = json::array();
  for (const auto& r : rows) {
    json row = {{"K", r.K},
                {"method", r.method},
                {"status", r.ok ? "ok" : "failed"},
                {"total_l2", r.ok ? number_or_null(r.total_l2) : json(nullptr)},
                {"acceptance_mean", r.acceptance_mean},
                {"acceptance_min", r.acceptance_min},
                {"warnings", r.warnings},
                {"error", r.error}};
    json marg = json::object();
    for (std::size_t j = 0; j < parameter_names.size(); ++j) {
      marg[parameter_names[j]] =
          r.ok && j < r.per_marginal.size() ? number_or_null(r.per_marginal[j]) : json(nullptr);
    }
    row["l2"] = marg;
    row["joint_l2"] = r.joint_l2 ? number_or_null(*r.joint_l2) : json(nullptr);
    if (include_timing) row["seconds"] = r.seconds;
    out.push_back(row);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  json& meta = result.metadata;
  meta["config"] = to_json(config);
  meta["seeds"] = {{"data", config.data_seed},
                   {"shard", config.shard_seed},
                   {"chain", config.chain_seed},
                   {"chain_rule", "seed_i = chain_seed + i, i = 0..K-1"},
                   {"standard_chain", config.chain_seed + kStandardSeedOffset},
                   {"reference", config.reference_seed}};

  Dataset data;
  int features = 0;
  if (config.data_source == "csv") {
    TabularSource src;
    src.path = config.csv_path;
    src.has_header = config.csv_has_header;
    src.label_column = config.csv_label_column;
    src.positive_label = config.csv_positive_label;
    IngestResult ing = ingest_csv(src, config.csv_features, config.N);
    data = std::move(ing.data);
    features = config.csv_features;
    meta["ingest"] = {{"rows", ing.report.rows},
                      {"positive_fraction", ing.report.positive_fraction},
                      {"feature_means", ing.report.feature_means},
                      {"feature_sds", ing.report.feature_sds},
                      {"label_rule", ing.report.label_rule}};
  } else {
    GeneratorSpec spec{config.example,
                       config.true_params.empty() ? default_params(config.example)
                                                  : config.true_params,
                       config.N, config.data_seed, config.covariate_sd};
    data = generate(spec);
    features = config.example == ExampleId::Logistic ? static_cast<int>(spec.params.size()) : 0;
  }

  const std::unique_ptr<ModelSpec> model = make_model(config, features);
  result.table.parameter_names = model->reported_names();
  meta["model"] = model->name();
  meta["sampling_coordinates"] = model->component_names();
  meta["reported_coordinates"] = model->reported_names();
  meta["l2"] = {{"grid_size", config.grid_size},
                {"bandwidth_policy",
                 "Silverman 1.06 sd n^-1/5 on the pooled sample, per marginal, shared grid"},
                {"joint", config.joint_l2}};
  meta["burn_in"] = config.burn_in;
  meta["newton_iters"] = config.newton_iters;

  const Reference ref = make_reference(config, *model, data);
  meta["reference"] = ref.info;

  L2Options l2opt;
  l2opt.grid_size = config.grid_size;
  l2opt.labels = model->reported_names();

  const bool want_rescaled = std::any_of(config.combiners.begin(), config.combiners.end(),
                                         [](CombineMethod m) { return m != CombineMethod::CMC; });
  const bool want_standard = std::any_of(config.combiners.begin(), config.combiners.end(),
                                         [](CombineMethod m) { return m == CombineMethod::CMC; });

  json per_k = json::array();
  for (int K : config.K) {
    json kmeta = {{"K", K}};
    std::vector<DataShard> shards;
    std::optional<SubposteriorResult> rescaled;
    std::optional<SubposteriorResult> standard;
    std::string rescaled_error;
    std::string standard_error;
    double rescaled_seconds = 0.0;
    double standard_seconds = 0.0;

    try {
      shards = make_shards(data, K, config.shard_seed);
    } catch (const Error& e) {
      rescaled_error = standard_error = e.what();
    }
    auto timed_run = [&](SubposteriorKind kind, Seed master, std::optional<SubposteriorResult>& out,
                         std::string& err, double& secs) {
      const auto start = std::chrono::steady_clock::now();
      try {
        out = run_subposteriors(
            chain_for(config, *model, kind, config.burn_in, config.draws, config.thin), shards,
            {master, config.workers});
      } catch (const Error& e) {
        err = e.what();
      }
      secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    if (!shards.empty() && want_rescaled) {
      timed_run(SubposteriorKind::Rescaled, config.chain_seed, rescaled, rescaled_error,
                rescaled_seconds);
    }
    if (!shards.empty() && want_standard) {
      timed_run(SubposteriorKind::Standard, config.chain_seed + kStandardSeedOffset, standard,
                standard_error, standard_seconds);
    }

    for (CombineMethod method : config.combiners) {
      ResultRow row;
      row.K = K;
      row.method = to_string(method);
      const bool cmc = method == CombineMethod::CMC;
      const auto& sub = cmc ? standard : rescaled;
      const std::string& sub_error = cmc ? standard_error : rescaled_error;
      const auto start = std::chrono::steady_clock::now();
      if (!sub) {
        row.error = sub_error.empty() ? "subposterior chains did not run" : sub_error;
        result.table.rows.push_back(row);
        continue;
      }
      fill_acceptance(row, *sub);
      try {
        CombinedSample combined;
        if (method == CombineMethod::AR) {
          combined = combine_ar(*sub);
        } else if (method == CombineMethod::ARNR) {
          const NewtonResult nr = refine_center_newton(*model, shards, common_center(*sub),
                                                       config.newton_iters, config.newton_tol,
                                                       config.workers);
          kmeta["newton"] = newton_json(nr);
          if (nr.failed()) {
            row.warnings.push_back("Newton refinement failed (" + to_string(nr.status) +
                                   "), using the unrefined center");
          }
          combined = recenter(*sub, nr.center, CombineMethod::ARNR);
        } else {
          combined = combine_cmc(*sub);
        }
        for (const auto& w : combined.warnings) row.warnings.push_back(w);

        if (method == CombineMethod::AR && model->has_hessian()) {
          try {
            kmeta["fisher_check"] =
                check_json(fisher_covariance_check(*model, *sub, shards, combined, data.n()));
          } catch (const Error& e) {
            kmeta["fisher_check"] = {{"error", e.what()}};
          }
        }

        const Matrix draws = reported(*model, combined.draws);
        const L2Report l2 = ref.draws.rows() > 0 ? l2_distance(draws, ref.draws, l2opt)
                                                 : l2_distance(draws, ref.analytic, l2opt);
        row.per_marginal = l2.per_marginal;
        row.total_l2 = l2.total;
        if (config.joint_l2 && ref.draws.rows() > 0 && draws.cols() <= 2) {
          row.joint_l2 = l2_joint(draws, ref.draws);
        }
        for (std::size_t j = 0; j < l2.first.size(); ++j) {
          result.densities.push_back(
              {K, row.method, l2opt.labels[j], l2.first[j], l2.second[j]});
        }
        row.ok = true;
      } catch (const Error& e) {
        row.error = e.what();
      }
      row.seconds = (cmc ? standard_seconds : rescaled_seconds) +
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.table.rows.push_back(row);
    }
    if (rescaled) {
      kmeta["shard_means"] = json::array();
      for (const auto& m : rescaled->shard_means) kmeta["shard_means"].push_back(vector_json(m));
      kmeta["common_center"] = vector_json(common_center(*rescaled));
    }
    per_k.push_back(kmeta);
  }
  meta["per_K"] = per_k;
  return result;
}

std::vector<std::filesystem::path> emit_density_grids(const ExperimentResult& result,
                                                      const std::filesystem::path& outdir) {
  std::vector<std::filesystem::path> written;
  if (result.densities.empty()) {
    std::cerr << "no density estimates to write\n";
    return written;
  }
  std::filesystem::create_directories(outdir);
  for (const auto& panel : result.densities) {
    const std::string stem = panel.parameter + "_K" + std::to_string(panel.K) + "_";
    const auto est = outdir / (stem + file_safe(panel.method) + ".csv");
    const auto ref = outdir / (stem + file_safe(panel.method) + "_reference.csv");
    write_density_csv(panel.estimate, est);
    write_density_csv(panel.reference, ref);
    written.push_back(est);
    written.push_back(ref);
  }
  return written;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(outdir / name);
    if (!out) throw IoError("cannot write " + (outdir / name).string());
    out << text;
  };
  write("results.csv", result.table.to_csv());
  write("results.json", result.table.to_json().dump(2) + "\n");
  write("run_metadata.json", result.metadata.dump(2) + "\n");
  emit_density_grids(result, outdir / "densities");
}

}  // namespace psmc
