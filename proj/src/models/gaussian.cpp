#include <cmath>
#include <limits>

#include "psmc/distributions.hpp"
#include "psmc/models.hpp"

namespace psmc {

double GaussianModel::log_lik(const Vector& theta, Row row) const {
  const double log_sigma = theta[1];
  const double z = (row[0] - theta[0]) * std::exp(-log_sigma);
  return -log_sigma - dist::kLogSqrt2Pi - 0.5 * z * z;
}

Vector GaussianModel::grad_log_lik(const Vector& theta, Row row) const {
  const double inv_var = std::exp(-2.0 * theta[1]);
  const double r = row[0] - theta[0];
  Vector g(2);
  g << r * inv_var, -1.0 + r * r * inv_var;
  return g;
}

Matrix GaussianModel::hess_log_lik(const Vector& theta, Row row) const {
  const double inv_var = std::exp(-2.0 * theta[1]);
  const double r = row[0] - theta[0];
  Matrix h(2, 2);
  h << -inv_var, -2.0 * r * inv_var,
       -2.0 * r * inv_var, -2.0 * r * r * inv_var;
  return h;
}

double GaussianModel::log_prior(const Vector&) const { return 0.0; }
Vector GaussianModel::grad_log_prior(const Vector&) const { return Vector::Zero(2); }
Matrix GaussianModel::hess_log_prior(const Vector&) const { return Matrix::Zero(2, 2); }

std::optional<Matrix> GaussianModel::fisher_information(const Vector& theta) const {
  Matrix info = Matrix::Zero(2, 2);
  info(0, 0) = std::exp(-2.0 * theta[1]);
  info(1, 1) = 2.0;
  return info;
}

Vector GaussianModel::to_reported(const Vector& theta) const {
  Vector out(2);
  out << theta[0], std::exp(2.0 * theta[1]);
  return out;
}

LogTarget GaussianModel::bind(std::shared_ptr<const RowMatrix> rows, TargetWeights weights) const {
  if (!rows || rows->rows() < 1) throw PreconditionError("cannot bind an empty shard");
  if (rows->cols() != 1) throw DimensionMismatch("gaussian rows must have one column");
  const double n = static_cast<double>(rows->rows());
  const double mean = rows->col(0).mean();
  const double css = (rows->col(0).array() - mean).square().sum();
  if (!std::isfinite(css)) throw NumericalError("gaussian: non-finite data");
  return [n, mean, css, weights](const Vector& theta) {
    const double log_sigma = theta[1];
    const double inv_var = std::exp(-2.0 * log_sigma);
    const double d = mean - theta[0];
    const double ll = -n * (log_sigma + dist::kLogSqrt2Pi) - 0.5 * inv_var * (css + n * d * d);
    if (!std::isfinite(ll)) return -std::numeric_limits<double>::infinity();
    return weights.likelihood * ll;
  };
}

}  // namespace psmc
