#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "psmc/metrics.hpp"

namespace psmc {

namespace {

struct Moments {
  double n = 0.0;
  double sum = 0.0;
  double lo = INFINITY;
  double hi = -INFINITY;
};

Moments moments_of(const Eigen::Ref<const Vector>& x) {
  Moments m;
  m.n = static_cast<double>(x.size());
  m.sum = x.sum();
  m.lo = x.minCoeff();
  m.hi = x.maxCoeff();
  return m;
}

// Silverman bandwidth of the concatenation, computed so the result does not depend on
// which side comes first.
double pooled_bandwidth(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const Moments ma = moments_of(a);
  const Moments mb = moments_of(b);
  const double n = ma.n + mb.n;
  const double mean = (ma.sum + mb.sum) / n;
  const double ss = (a.array() - mean).square().sum() + (b.array() - mean).square().sum();
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw DegenerateSample("l2: pooled sample has no spread");
  return 1.06 * sd * std::pow(n, -0.2);
}

std::vector<double> column(const Matrix& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  Eigen::Map<Vector>(out.data(), m.rows()) = m.col(j);
  return out;
}

std::string label_for(const L2Options& options, Eigen::Index j) {
  if (j < static_cast<Eigen::Index>(options.labels.size())) {
    return options.labels[static_cast<std::size_t>(j)];
  }
  return "x" + std::to_string(j + 1);
}

double squared_difference_integral(const DensityEstimate& p, const DensityEstimate& q) {
  std::vector<double> diff(p.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const double d = p.values[i] - q.values[i];
    diff[i] = d * d;
  }
  return trapezoid(p.grid, diff);
}

void finish(L2Report& report) {
  report.total = 0.0;
  for (double v : report.per_marginal) report.total += v;
}

}  // namespace

L2Report l2_distance(const Matrix& a, const Matrix& b, const L2Options& options) {
  if (a.cols() != b.cols()) throw DimensionMismatch("l2_distance: samples differ in dimension");
  L2Report report;
  report.grid_size = options.grid_size;
  report.bandwidth_policy = options.bandwidth ? "fixed" : "pooled-silverman";
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double h = options.bandwidth ? *options.bandwidth : pooled_bandwidth(a.col(j), b.col(j));
    const double lo = std::min(a.col(j).minCoeff(), b.col(j).minCoeff()) - 3.0 * h;
    const double hi = std::max(a.col(j).maxCoeff(), b.col(j).maxCoeff()) + 3.0 * h;
    const Grid grid{lo, hi, options.grid_size};
    const std::string label = label_for(options, j);
    report.first.push_back(kde_on_grid(column(a, j), grid, h, label));
    report.second.push_back(kde_on_grid(column(b, j), grid, h, label));
    report.per_marginal.push_back(squared_difference_integral(report.first.back(),
                                                              report.second.back()));
  }
  finish(report);
  return report;
}

L2Report l2_distance(const Matrix& a, const std::vector<AnalyticMarginal>& b,
                     const L2Options& options) {
  if (static_cast<Eigen::Index>(b.size()) != a.cols()) {
    throw DimensionMismatch("l2_distance: analytic side has wrong dimension");
  }
  L2Report report;
  report.grid_size = options.grid_size;
  report.bandwidth_policy = options.bandwidth ? "fixed" : "silverman";
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const std::vector<double> samples = column(a, j);
    const double h = options.bandwidth ? *options.bandwidth : silverman_bandwidth(samples);
    const AnalyticMarginal& truth = b[static_cast<std::size_t>(j)];
    const double lo = std::min(a.col(j).minCoeff() - 3.0 * h, truth.lo);
    const double hi = std::max(a.col(j).maxCoeff() + 3.0 * h, truth.hi);
    const Grid grid{lo, hi, options.grid_size};
    const std::string label = label_for(options, j);
    report.first.push_back(kde_on_grid(samples, grid, h, label));
    DensityEstimate exact;
    exact.grid = grid.points();
    exact.label = label;
    exact.values.reserve(exact.grid.size());
    for (double x : exact.grid) exact.values.push_back(truth.pdf(x));
    report.second.push_back(std::move(exact));
    report.per_marginal.push_back(squared_difference_integral(report.first.back(),
                                                              report.second.back()));
  }
  finish(report);
  return report;
}

double l2_analytic(const AnalyticMarginal& p, const AnalyticMarginal& q, int grid_size) {
  if (grid_size < 2) throw PreconditionError("l2_analytic: grid_size < 2");
  const Grid grid{std::min(p.lo, q.lo), std::max(p.hi, q.hi), grid_size};
  const std::vector<double> x = grid.points();
  std::vector<double> d2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = p.pdf(x[i]) - q.pdf(x[i]);
    d2[i] = d * d;
  }
  return trapezoid(x, d2);
}

namespace {

// Linear binning onto a G x G grid followed by a separable Gaussian kernel sum.
Matrix binned_kde_2d(const Matrix& s, const Grid& gx, const Grid& gy, double hx, double hy) {
  const int G = gx.size;
  Matrix counts = Matrix::Zero(G, G);
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double px = std::clamp((s(r, 0) - gx.lo) / gx.step(), 0.0, G - 1.0);
    const double py = std::clamp((s(r, 1) - gy.lo) / gy.step(), 0.0, G - 1.0);
    const int ix = std::min(static_cast<int>(px), G - 2);
    const int iy = std::min(static_cast<int>(py), G - 2);
    const double fx = px - ix;
    const double fy = py - iy;
    counts(ix, iy) += (1 - fx) * (1 - fy);
    counts(ix + 1, iy) += fx * (1 - fy);
    counts(ix, iy + 1) += (1 - fx) * fy;
    counts(ix + 1, iy + 1) += fx * fy;
  }
  auto kernel_matrix = [G](const Grid& g, double h) {
    Matrix k(G, G);
    for (int i = 0; i < G; ++i) {
      for (int j = 0; j < G; ++j) {
        const double u = (i - j) * g.step() / h;
        k(i, j) = std::exp(-0.5 * u * u) / (h * std::sqrt(2.0 * std::numbers::pi));
      }
    }
    return k;
  };
  return kernel_matrix(gx, hx) * counts * kernel_matrix(gy, hy).transpose() /
         static_cast<double>(s.rows());
}

}  // namespace

double l2_joint(const Matrix& a, const Matrix& b, int grid_size) {
  if (a.cols() != b.cols()) throw DimensionMismatch("l2_joint: samples differ in dimension");
  if (a.cols() > 2) throw PreconditionError("l2_joint: only d <= 2 is supported");
  if (a.cols() == 1) {
    L2Options options;
    options.grid_size = grid_size;
    return l2_distance(a, b, options).total;
  }
  if (a.rows() < static_cast<Eigen::Index>(kMinKdeSamples) ||
      b.rows() < static_cast<Eigen::Index>(kMinKdeSamples)) {
    throw PreconditionError("l2_joint: need at least 100 samples per side");
  }
  std::array<Grid, 2> grids;
  std::array<double, 2> h{};
  const double n = static_cast<double>(a.rows() + b.rows());
  for (int j = 0; j < 2; ++j) {
    // 2-d normal-reference rule n^{-1/6}
    const double h1 = pooled_bandwidth(a.col(j), b.col(j)) / 1.06 * std::pow(n, 0.2);
    h[static_cast<std::size_t>(j)] = h1 * std::pow(n, -1.0 / 6.0);
    const double lo = std::min(a.col(j).minCoeff(), b.col(j).minCoeff()) - 3.0 * h[j];
    const double hi = std::max(a.col(j).maxCoeff(), b.col(j).maxCoeff()) + 3.0 * h[j];
    grids[static_cast<std::size_t>(j)] = Grid{lo, hi, grid_size};
  }
  const Matrix fa = binned_kde_2d(a, grids[0], grids[1], h[0], h[1]);
  const Matrix fb = binned_kde_2d(b, grids[0], grids[1], h[0], h[1]);
  const Matrix sq = (fa - fb).array().square().matrix();
  // 2-d trapezoid with edge weights 1/2
  Vector wx = Vector::Constant(grid_size, grids[0].step());
  Vector wy = Vector::Constant(grid_size, grids[1].step());
  wx[0] *= 0.5;
  wx[grid_size - 1] *= 0.5;
  wy[0] *= 0.5;
  wy[grid_size - 1] *= 0.5;
  return wx.dot(sq * wy);
}

}  // namespace psmc
