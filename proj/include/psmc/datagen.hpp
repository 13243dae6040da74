#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psmc/model_core.hpp"

namespace psmc {

enum class ExampleId { Gaussian, Logistic, Bernoulli, Mixture };

std::string to_string(ExampleId id);
/// Throws UnknownExample.
ExampleId parse_example(const std::string& text);
std::vector<ExampleId> all_examples();
std::string describe(ExampleId id);

/// Synthetic data recipe. Parameters per example:
///   Gaussian  {mean, variance}                    default {0, 10}
///   Logistic  {theta_1..theta_p}, x_1 = 1          default {0.3, 5, -7, 2.4, -20}
///   Bernoulli {p}                                 default {0.1}
///   Mixture   {alpha, beta, sigma2, psi2, p}      default {2, 5, 1, 10, 0.05}
struct GeneratorSpec {
  ExampleId example = ExampleId::Gaussian;
  std::vector<double> params;
  Eigen::Index N = 1000;
  Seed seed = 1;
  /// Standard deviation of the mixture covariates x1, x2 (mean zero, independent).
  double covariate_sd = 1.0;

  void validate() const;
};

std::vector<double> default_params(ExampleId id);
GeneratorSpec default_spec(ExampleId id, Eigen::Index N, Seed seed);

/// Pure function of its argument: identical GeneratorSpecs give bit-identical datasets.
Dataset generate(const GeneratorSpec& spec);

struct TabularSource {
  std::filesystem::path path;
  char delimiter = ',';
  /// Detected from the first line when absent.
  std::optional<bool> has_header;
  /// Zero-based column holding the class; negative counts from the end.
  int label_column = -1;
  /// y = 1 iff the label column equals this value.
  double positive_label = 2.0;
};

struct IngestReport {
  Eigen::Index rows = 0;
  double positive_fraction = 0.0;
  std::vector<double> feature_means;
  std::vector<double> feature_sds;
  std::string label_rule;
};

struct IngestResult {
  Dataset data;
  IngestReport report;
};

/// First n_rows rows, first n_features columns standardized to mean 0 and variance 1
/// (population moments), binary label from the configured rule. Output columns:
/// x1..xp, y.
IngestResult ingest_csv(const TabularSource& source, int n_features, Eigen::Index n_rows);

/// Lossless CSV cache (17 significant digits, header of column names).
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace psmc
