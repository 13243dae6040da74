#include <cmath>
#include <limits>

#include "psmc/models.hpp"

namespace psmc {

BernoulliModel::BernoulliModel(double a0, double b0) : a0_(a0), b0_(b0) {
  if (!(a0 > 0.0 && b0 > 0.0)) throw PreconditionError("Beta prior shapes must be positive");
}

bool BernoulliModel::in_support(const Vector& theta) const {
  return theta[0] > 0.0 && theta[0] < 1.0;
}

double BernoulliModel::log_lik(const Vector& theta, Row row) const {
  const double p = theta[0];
  return row[0] * std::log(p) + (1.0 - row[0]) * std::log1p(-p);
}

Vector BernoulliModel::grad_log_lik(const Vector& theta, Row row) const {
  const double p = theta[0];
  return Vector::Constant(1, row[0] / p - (1.0 - row[0]) / (1.0 - p));
}

Matrix BernoulliModel::hess_log_lik(const Vector& theta, Row row) const {
  const double p = theta[0];
  return Matrix::Constant(1, 1, -row[0] / (p * p) - (1.0 - row[0]) / ((1.0 - p) * (1.0 - p)));
}

double BernoulliModel::log_prior(const Vector& theta) const {
  return dist::beta_log_pdf(theta[0], a0_, b0_);
}

Vector BernoulliModel::grad_log_prior(const Vector& theta) const {
  const double p = theta[0];
  return Vector::Constant(1, (a0_ - 1.0) / p - (b0_ - 1.0) / (1.0 - p));
}

Matrix BernoulliModel::hess_log_prior(const Vector& theta) const {
  const double p = theta[0];
  return Matrix::Constant(1, 1, -(a0_ - 1.0) / (p * p) - (b0_ - 1.0) / ((1.0 - p) * (1.0 - p)));
}

std::optional<Matrix> BernoulliModel::fisher_information(const Vector& theta) const {
  const double p = theta[0];
  return Matrix::Constant(1, 1, 1.0 / (p * (1.0 - p)));
}

Vector BernoulliModel::default_init() const { return Vector::Constant(1, 0.5); }

LogTarget BernoulliModel::bind(std::shared_ptr<const RowMatrix> rows, TargetWeights weights) const {
  if (!rows || rows->rows() < 1) throw PreconditionError("cannot bind an empty shard");
  const double n = static_cast<double>(rows->rows());
  const double s = rows->col(0).sum();
  return [this, n, s, weights](const Vector& theta) {
    if (!in_support(theta)) return -std::numeric_limits<double>::infinity();
    const double p = theta[0];
    const double ll = s * std::log(p) + (n - s) * std::log1p(-p);
    return weights.likelihood * ll + weights.prior * log_prior(theta);
  };
}

BetaPosterior beta_bernoulli_posterior(const DataShard& shard, TargetWeights weights, double a0,
                                       double b0) {
  if (shard.m() < 1) throw PreconditionError("beta_bernoulli_posterior: empty shard");
  const auto& col = shard.data().col(0);
  if (((col.array() != 0.0) && (col.array() != 1.0)).any()) {
    throw PreconditionError("beta_bernoulli_posterior: rows must be 0 or 1");
  }
  const double s = col.sum();
  const double m = static_cast<double>(shard.m());
  auto tempered = [&](double shape) {
    return weights.prior == 1.0 ? shape : weights.prior * (shape - 1.0) + 1.0;
  };
  return {tempered(a0) + weights.likelihood * s, tempered(b0) + weights.likelihood * (m - s)};
}

BetaPosterior beta_bernoulli_exact(const DataShard& shard, int replication, double a0, double b0) {
  return beta_bernoulli_posterior(shard, rescaled_weights(replication), a0, b0);
}

}  // namespace psmc
