#include <fstream>
#include <set>

#include "psmc/experiment.hpp"

namespace psmc {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "schema_version", "example", "data_source", "N", "K", "combiners", "true_params",
      "covariate_sd", "csv_path", "csv_features", "csv_label_column", "csv_positive_label",
      "csv_has_header", "data_seed", "shard_seed", "chain_seed", "reference_seed", "burn_in",
      "draws", "thin", "reference_burn_in", "reference_draws", "reference_thin", "newton_iters",
      "newton_tol", "grid_size", "joint_l2", "workers", "output_dir", "prior_a0", "prior_b0",
      "hyper_m_alpha", "hyper_sigma2_alpha", "hyper_m_beta", "hyper_sigma2_beta",
      "hyper_alpha_sigma", "hyper_beta_sigma", "hyper_alpha_psi", "hyper_beta_psi",
      "hyper_lambda", "hyper_eta", "mixture_init"};
  return keys;
}

template <typename T>
void read(const json& doc, const char* key, T& target) {
  if (!doc.contains(key)) return;
  try {
    target = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != kConfigSchemaVersion) {
    throw ConfigurationError("unsupported schema_version " + std::to_string(schema_version));
  }
  if (N < 1) throw ConfigurationError("N must be >= 1");
  if (K.empty()) throw ConfigurationError("K list is empty");
  for (int k : K) {
    if (k < 1 || N % k != 0) {
      throw ConfigurationError("K = " + std::to_string(k) + " does not divide N = " +
                               std::to_string(N));
    }
  }
  if (combiners.empty()) throw ConfigurationError("combiner list is empty");
  if (data_source != "synthetic" && data_source != "csv") {
    throw ConfigurationError("data_source must be 'synthetic' or 'csv'");
  }
  if (data_source == "csv") {
    if (example != ExampleId::Logistic) {
      throw ConfigurationError("csv data is only supported for the logistic example");
    }
    if (csv_path.empty()) throw ConfigurationError("csv_path is required for csv data");
    if (csv_features < 1) throw ConfigurationError("csv_features must be >= 1");
  }
  for (CombineMethod m : combiners) {
    if (m == CombineMethod::ARNR && example == ExampleId::Mixture) {
      throw ConfigurationError("AR+NR needs a model Hessian; the mixture model has none");
    }
  }
  if (burn_in < 0 || draws < 1 || thin < 1) {
    throw ConfigurationError("need burn_in >= 0, draws >= 1, thin >= 1");
  }
  if (reference_burn_in < 0 || reference_draws < 1 || reference_thin < 1) {
    throw ConfigurationError("need reference_burn_in >= 0, reference_draws >= 1, thin >= 1");
  }
  if (example != ExampleId::Bernoulli && burn_in < 1) {
    throw ConfigurationError("MCMC examples need burn_in >= 1");
  }
  if (newton_iters < 0) throw ConfigurationError("newton_iters must be >= 0");
  if (!(newton_tol > 0.0)) throw ConfigurationError("newton_tol must be positive");
  if (grid_size < 16) throw ConfigurationError("grid_size must be >= 16");
  if (workers < 0) throw ConfigurationError("workers must be >= 0");
  if (!(prior_a0 > 0.0 && prior_b0 > 0.0)) throw ConfigurationError("Beta prior must be > 0");
  hyper.validate();
  if (example == ExampleId::Mixture) {
    MixtureModelState{mixture_init, {}}.validate(1);
  }
  if (data_source == "synthetic" && !true_params.empty()) {
    GeneratorSpec spec{example, true_params, N, data_seed, covariate_sd};
    try {
      spec.validate();
    } catch (const Error& e) {
      throw ConfigurationError(e.what());
    }
  }
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigurationError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().contains(key)) throw ConfigurationError("unknown config key '" + key + "'");
    if (value.is_object()) throw ConfigurationError("config key '" + key + "' must not nest");
  }
  if (!doc.contains("schema_version")) throw ConfigurationError("schema_version is required");
  if (!doc.contains("example")) throw ConfigurationError("example is required");

  ExperimentConfig c;
  read(doc, "schema_version", c.schema_version);
  std::string example;
  read(doc, "example", example);
  try {
    c.example = parse_example(example);
  } catch (const UnknownExample& e) {
    throw ConfigurationError(e.what());
  }
  read(doc, "data_source", c.data_source);
  read(doc, "N", c.N);
  if (doc.contains("K") && doc.at("K").is_number_integer()) {
    c.K = {doc.at("K").get<int>()};
  } else {
    read(doc, "K", c.K);
  }
  if (doc.contains("combiners")) {
    std::vector<std::string> names;
    read(doc, "combiners", names);
    c.combiners.clear();
    for (const auto& n : names) c.combiners.push_back(parse_method(n));
  }
  read(doc, "true_params", c.true_params);
  read(doc, "covariate_sd", c.covariate_sd);
  read(doc, "csv_path", c.csv_path);
  read(doc, "csv_features", c.csv_features);
  read(doc, "csv_label_column", c.csv_label_column);
  read(doc, "csv_positive_label", c.csv_positive_label);
  if (doc.contains("csv_has_header") && !doc.at("csv_has_header").is_null()) {
    bool h = false;
    read(doc, "csv_has_header", h);
    c.csv_has_header = h;
  }
  read(doc, "data_seed", c.data_seed);
  read(doc, "shard_seed", c.shard_seed);
  read(doc, "chain_seed", c.chain_seed);
  read(doc, "reference_seed", c.reference_seed);
  read(doc, "burn_in", c.burn_in);
  read(doc, "draws", c.draws);
  read(doc, "thin", c.thin);
  read(doc, "reference_burn_in", c.reference_burn_in);
  read(doc, "reference_draws", c.reference_draws);
  read(doc, "reference_thin", c.reference_thin);
  read(doc, "newton_iters", c.newton_iters);
  read(doc, "newton_tol", c.newton_tol);
  read(doc, "grid_size", c.grid_size);
  read(doc, "joint_l2", c.joint_l2);
  read(doc, "workers", c.workers);
  read(doc, "output_dir", c.output_dir);
  read(doc, "prior_a0", c.prior_a0);
  read(doc, "prior_b0", c.prior_b0);
  read(doc, "hyper_m_alpha", c.hyper.m_alpha);
  read(doc, "hyper_sigma2_alpha", c.hyper.sigma2_alpha);
  read(doc, "hyper_m_beta", c.hyper.m_beta);
  read(doc, "hyper_sigma2_beta", c.hyper.sigma2_beta);
  read(doc, "hyper_alpha_sigma", c.hyper.alpha_sigma);
  read(doc, "hyper_beta_sigma", c.hyper.beta_sigma);
  read(doc, "hyper_alpha_psi", c.hyper.alpha_psi);
  read(doc, "hyper_beta_psi", c.hyper.beta_psi);
  read(doc, "hyper_lambda", c.hyper.lambda);
  read(doc, "hyper_eta", c.hyper.eta);
  if (doc.contains("mixture_init")) {
    std::vector<double> init;
    read(doc, "mixture_init", init);
    if (init.size() != 5) throw ConfigurationError("mixture_init needs 5 values");
    c.mixture_init = MixtureParams::from_vector(Eigen::Map<const Vector>(init.data(), 5));
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json doc;
  doc["schema_version"] = c.schema_version;
  doc["example"] = to_string(c.example);
  doc["data_source"] = c.data_source;
  doc["N"] = c.N;
  doc["K"] = c.K;
  std::vector<std::string> names;
  for (CombineMethod m : c.combiners) names.push_back(to_string(m));
  doc["combiners"] = names;
  doc["true_params"] = c.true_params.empty() ? default_params(c.example) : c.true_params;
  doc["covariate_sd"] = c.covariate_sd;
  if (c.data_source == "csv") {
    doc["csv_path"] = c.csv_path;
    doc["csv_features"] = c.csv_features;
    doc["csv_label_column"] = c.csv_label_column;
    doc["csv_positive_label"] = c.csv_positive_label;
    doc["csv_has_header"] = c.csv_has_header ? json(*c.csv_has_header) : json(nullptr);
  }
  doc["data_seed"] = c.data_seed;
  doc["shard_seed"] = c.shard_seed;
  doc["chain_seed"] = c.chain_seed;
  doc["reference_seed"] = c.reference_seed;
  doc["burn_in"] = c.burn_in;
  doc["draws"] = c.draws;
  doc["thin"] = c.thin;
  doc["reference_burn_in"] = c.reference_burn_in;
  doc["reference_draws"] = c.reference_draws;
  doc["reference_thin"] = c.reference_thin;
  doc["newton_iters"] = c.newton_iters;
  doc["newton_tol"] = c.newton_tol;
  doc["grid_size"] = c.grid_size;
  doc["joint_l2"] = c.joint_l2;
  doc["workers"] = c.workers;
  doc["output_dir"] = c.output_dir;
  doc["prior_a0"] = c.prior_a0;
  doc["prior_b0"] = c.prior_b0;
  doc["hyper_m_alpha"] = c.hyper.m_alpha;
  doc["hyper_sigma2_alpha"] = c.hyper.sigma2_alpha;
  doc["hyper_m_beta"] = c.hyper.m_beta;
  doc["hyper_sigma2_beta"] = c.hyper.sigma2_beta;
  doc["hyper_alpha_sigma"] = c.hyper.alpha_sigma;
  doc["hyper_beta_sigma"] = c.hyper.beta_sigma;
  doc["hyper_alpha_psi"] = c.hyper.alpha_psi;
  doc["hyper_beta_psi"] = c.hyper.beta_psi;
  doc["hyper_lambda"] = c.hyper.lambda;
  doc["hyper_eta"] = c.hyper.eta;
  const Vector init = c.mixture_init.to_vector();
  doc["mixture_init"] = std::vector<double>(init.data(), init.data() + init.size());
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace psmc
