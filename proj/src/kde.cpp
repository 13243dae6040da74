#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "psmc/metrics.hpp"

namespace psmc {

std::vector<double> Grid::points() const {
  std::vector<double> out(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) out[static_cast<std::size_t>(i)] = at(i);
  return out;
}

double DensityEstimate::integral() const { return trapezoid(grid, values); }

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("trapezoid: x and y differ in length");
  double total = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) total += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return total;
}

namespace {

double sample_sd(std::span<const double> s) {
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(s.size() - 1));
}

void check_samples(std::span<const double> samples) {
  if (samples.size() < kMinKdeSamples) {
    throw PreconditionError("kde: need at least " + std::to_string(kMinKdeSamples) +
                            " samples, got " + std::to_string(samples.size()));
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw NumericalError("kde: non-finite sample");
  }
}

// Exact kernel sums cost n * G; above this the samples are binned first.
constexpr double kExactWorkLimit = 2e7;

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw DegenerateSample("bandwidth: need at least two samples");
  const double sd = sample_sd(samples);
  if (!(sd > 0.0)) throw DegenerateSample("bandwidth: sample standard deviation is zero");
  return 1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2);
}

DensityEstimate kde_on_grid(std::span<const double> samples, const Grid& grid, double bandwidth,
                            std::string label) {
  check_samples(samples);
  if (!(bandwidth > 0.0)) throw PreconditionError("kde: bandwidth must be positive");
  if (grid.size < 2 || !(grid.hi > grid.lo)) throw PreconditionError("kde: invalid grid");

  const auto G = static_cast<std::size_t>(grid.size);
  const double n = static_cast<double>(samples.size());
  const double norm = 1.0 / (n * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  const double step = grid.step();

  DensityEstimate out;
  out.grid = grid.points();
  out.values.assign(G, 0.0);
  out.bandwidth = bandwidth;
  out.label = std::move(label);

  if (n * static_cast<double>(G) <= kExactWorkLimit) {
    for (std::size_t i = 0; i < G; ++i) {
      double acc = 0.0;
      for (double s : samples) {
        const double u = (out.grid[i] - s) / bandwidth;
        acc += std::exp(-0.5 * u * u);
      }
      out.values[i] = acc * norm;
    }
    return out;
  }

  // linear binning onto the grid, then a kernel sum over bins
  std::vector<double> counts(G, 0.0);
  for (double s : samples) {
    const double pos = (s - grid.lo) / step;
    if (pos <= 0.0) {
      counts.front() += 1.0;
      continue;
    }
    if (pos >= static_cast<double>(G - 1)) {
      counts.back() += 1.0;
      continue;
    }
    const auto left = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(left);
    counts[left] += 1.0 - frac;
    counts[left + 1] += frac;
  }
  const auto reach = std::min<std::size_t>(G - 1, static_cast<std::size_t>(
                                                      std::ceil(8.0 * bandwidth / step)));
  std::vector<double> kernel(reach + 1);
  for (std::size_t k = 0; k <= reach; ++k) {
    const double u = static_cast<double>(k) * step / bandwidth;
    kernel[k] = std::exp(-0.5 * u * u);
  }
  for (std::size_t b = 0; b < G; ++b) {
    if (counts[b] == 0.0) continue;
    const std::size_t lo = b >= reach ? b - reach : 0;
    const std::size_t hi = std::min(G - 1, b + reach);
    for (std::size_t i = lo; i <= hi; ++i) {
      out.values[i] += counts[b] * kernel[i > b ? i - b : b - i];
    }
  }
  for (double& v : out.values) v *= norm;
  return out;
}

DensityEstimate kde_1d(std::span<const double> samples, int grid_size,
                       std::optional<double> bandwidth, std::string label) {
  check_samples(samples);
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (!(*hi > *lo)) throw DegenerateSample("kde: constant sample");
  return kde_on_grid(samples, Grid{*lo - 3.0 * h, *hi + 3.0 * h, grid_size}, h, std::move(label));
}

void write_density_csv(const DensityEstimate& density, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "grid,value\n";
  for (std::size_t i = 0; i < density.grid.size(); ++i) {
    out << density.grid[i] << ',' << density.values[i] << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

DensityEstimate read_density_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  DensityEstimate d;
  d.label = path.stem().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("grid", 0) == 0) continue;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected grid,value", lineno);
    try {
      const double g = std::stod(line.substr(0, comma));
      const double v = std::stod(line.substr(comma + 1));
      d.grid.push_back(g);
      d.values.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("non-numeric density row", lineno);
    }
  }
  return d;
}

}  // namespace psmc
