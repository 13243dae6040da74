#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "psmc/combiner.hpp"
#include "psmc/datagen.hpp"
#include "psmc/metrics.hpp"
#include "psmc/models.hpp"

namespace psmc {

inline constexpr int kConfigSchemaVersion = 1;

/// Flat key-value experiment description (JSON object, one level deep).
struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  ExampleId example = ExampleId::Gaussian;
  /// "synthetic" or "csv" (csv: logistic only).
  std::string data_source = "synthetic";
  Eigen::Index N = 100000;
  std::vector<int> K{20};
  std::vector<CombineMethod> combiners{CombineMethod::AR};
  /// Generator parameters; empty means the example defaults.
  std::vector<double> true_params;
  double covariate_sd = 1.0;

  std::string csv_path;
  int csv_features = 3;
  int csv_label_column = -1;
  double csv_positive_label = 2.0;
  std::optional<bool> csv_has_header;

  Seed data_seed = 1;
  Seed shard_seed = 2;
  Seed chain_seed = 3;
  Seed reference_seed = 4;

  /// Per subposterior chain: iterations discarded, draws kept, thinning.
  int burn_in = 2000;
  int draws = 10000;
  int thin = 1;
  int reference_burn_in = 5000;
  int reference_draws = 200000;
  int reference_thin = 1;

  int newton_iters = 5;
  double newton_tol = 1e-8;

  int grid_size = kDefaultGridSize;
  /// Also report the joint 2-d L2 (d <= 2 only).
  bool joint_l2 = false;
  int workers = 0;
  std::string output_dir;

  double prior_a0 = 0.01;
  double prior_b0 = 0.01;
  MixtureHyperParams hyper;
  MixtureParams mixture_init{0.0, 0.0, 1.0, 1.0, 0.5};

  /// Throws ConfigurationError describing the first problem found.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResultRow {
  int K = 0;
  std::string method;
  bool ok = false;
  double total_l2 = 0.0;
  std::vector<double> per_marginal;
  std::optional<double> joint_l2;
  double seconds = 0.0;
  double acceptance_mean = 0.0;
  double acceptance_min = 0.0;
  std::vector<std::string> warnings;
  std::string error;
};

struct ResultTable {
  std::vector<std::string> parameter_names;
  std::vector<ResultRow> rows;

  const ResultRow* find(int K, const std::string& method) const;
  bool all_ok() const;
  /// Stable column order; the seconds column is omitted when include_timing is false.
  std::string to_csv(bool include_timing = true) const;
  nlohmann::json to_json(bool include_timing = true) const;
};

/// Marginal density of one method next to the reference, on a shared grid.
struct DensityPanel {
  int K = 0;
  std::string method;
  std::string parameter;
  DensityEstimate estimate;
  DensityEstimate reference;
};

struct ExperimentResult {
  ResultTable table;
  nlohmann::json metadata;
  std::vector<DensityPanel> densities;
};

/// Data, reference posterior, then for every K: shard, run subposterior chains, combine
/// with each configured method and score against the reference.
/// Failures of a cell are recorded in its row rather than aborting the sweep.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// One CSV per (parameter, K, method) plus the reference on the same grid.
/// Returns the written paths (empty, with a notice on stderr, when there is nothing to write).
std::vector<std::filesystem::path> emit_density_grids(const ExperimentResult& result,
                                                      const std::filesystem::path& outdir);

/// results.csv, results.json, run_metadata.json and densities/.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& outdir);

}  // namespace psmc
