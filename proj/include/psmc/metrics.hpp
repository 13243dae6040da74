#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psmc/combiner.hpp"
#include "psmc/model_core.hpp"
#include "psmc/shard_runner.hpp"

namespace psmc {

/// Equally spaced evaluation grid.
struct Grid {
  double lo = 0.0;
  double hi = 1.0;
  int size = 512;

  double step() const { return (hi - lo) / static_cast<double>(size - 1); }
  double at(int i) const { return i == size - 1 ? hi : lo + i * step(); }
  std::vector<double> points() const;
};

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
  std::string label;

  double integral() const;
};

inline constexpr int kDefaultGridSize = 512;
inline constexpr std::size_t kMinKdeSamples = 100;

double trapezoid(std::span<const double> x, std::span<const double> y);

/// 1.06 * sd * n^{-1/5}. Throws DegenerateSample when the sample has no spread.
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian-kernel density estimate on [min - 3h, max + 3h].
DensityEstimate kde_1d(std::span<const double> samples, int grid_size = kDefaultGridSize,
                       std::optional<double> bandwidth = std::nullopt, std::string label = {});

/// Gaussian-kernel density estimate evaluated on a given grid. Large inputs are linearly
/// binned onto the grid before the kernel sum.
DensityEstimate kde_on_grid(std::span<const double> samples, const Grid& grid, double bandwidth,
                            std::string label = {});

/// A known density on the "truth" side of an L2 comparison; [lo, hi] holds its mass.
struct AnalyticMarginal {
  std::function<double(double)> pdf;
  double lo;
  double hi;
};

struct L2Options {
  int grid_size = kDefaultGridSize;
  /// Overrides the pooled Silverman bandwidth for every marginal.
  std::optional<double> bandwidth;
  std::vector<std::string> labels;
};

struct L2Report {
  std::vector<double> per_marginal;
  double total = 0.0;
  int grid_size = 0;
  std::string bandwidth_policy;
  /// Estimates on the shared grid, one per marginal for each side.
  std::vector<DensityEstimate> first;
  std::vector<DensityEstimate> second;
};

/// Sum over marginals of integral (p - q)^2, both sides by KDE on a shared grid with the
/// pooled-sample Silverman bandwidth.
L2Report l2_distance(const Matrix& a, const Matrix& b, const L2Options& options = {});

/// As above with an analytic density on the second side.
L2Report l2_distance(const Matrix& a, const std::vector<AnalyticMarginal>& b,
                     const L2Options& options = {});

/// integral (p - q)^2 over the union of both supports, trapezoid rule.
double l2_analytic(const AnalyticMarginal& p, const AnalyticMarginal& q,
                   int grid_size = kDefaultGridSize);

/// Joint L2 for d <= 2 with a product Gaussian kernel on a shared grid_size^2 grid.
double l2_joint(const Matrix& a, const Matrix& b, int grid_size = 128);

/// Two-column CSV, header "grid,value", 17 significant digits.
void write_density_csv(const DensityEstimate& density, const std::filesystem::path& path);
DensityEstimate read_density_csv(const std::filesystem::path& path);

/// ||a - ref||_F / ||ref||_F.
double relative_frobenius(const Matrix& a, const Matrix& ref);

struct CheckReport {
  /// N cov(combined draws).
  Matrix scaled_cov;
  /// (1/K) sum_i I_i^{-1}, I_i the per-row observed information at the shard mean.
  Matrix avg_inverse_info;
  /// I^{-1} at the combined center (closed form when the model has one).
  Matrix inverse_info;
  bool analytic_info = false;
  double scaled_vs_avg = 0.0;
  double scaled_vs_info = 0.0;
  double avg_vs_info = 0.0;
};

CheckReport fisher_covariance_check(const ModelSpec& model, const SubposteriorResult& sub,
                                    const std::vector<DataShard>& shards,
                                    const CombinedSample& combined, Eigen::Index N);

}  // namespace psmc
