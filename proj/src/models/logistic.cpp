#include <cmath>

#include "psmc/models.hpp"

namespace psmc {

double log_sigmoid(double eta) {
  return eta >= 0.0 ? -std::log1p(std::exp(-eta)) : eta - std::log1p(std::exp(eta));
}

namespace {

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// y log s(eta) + (1 - y) log s(-eta)
double row_log_lik(double eta, double y) {
  return y * log_sigmoid(eta) + (1.0 - y) * log_sigmoid(-eta);
}

}  // namespace

LogisticModel::LogisticModel(int features) : features_(features) {
  if (features < 1) throw PreconditionError("logistic model needs at least one feature");
}

std::vector<std::string> LogisticModel::component_names() const {
  std::vector<std::string> names;
  for (int j = 1; j <= features_; ++j) names.push_back("theta" + std::to_string(j));
  return names;
}

double LogisticModel::log_lik(const Vector& theta, Row row) const {
  double eta = 0.0;
  for (int j = 0; j < features_; ++j) eta += row[j] * theta[j];
  const double ll = row_log_lik(eta, row[features_]);
  if (!std::isfinite(ll)) throw NumericalError("logistic: log-likelihood overflow");
  return ll;
}

Vector LogisticModel::grad_log_lik(const Vector& theta, Row row) const {
  Eigen::Map<const Vector> x(row.data(), features_);
  return (row[features_] - sigmoid(x.dot(theta))) * x;
}

Matrix LogisticModel::hess_log_lik(const Vector& theta, Row row) const {
  Eigen::Map<const Vector> x(row.data(), features_);
  const double s = sigmoid(x.dot(theta));
  return -s * (1.0 - s) * x * x.transpose();
}

double LogisticModel::log_prior(const Vector&) const { return 0.0; }
Vector LogisticModel::grad_log_prior(const Vector&) const { return Vector::Zero(features_); }
Matrix LogisticModel::hess_log_prior(const Vector&) const {
  return Matrix::Zero(features_, features_);
}

double LogisticModel::sum_log_lik(const Vector& theta, const RowMatrix& rows) const {
  check_theta(theta);
  const Eigen::ArrayXd eta = (rows.leftCols(features_) * theta).array();
  // y eta - softplus(eta), softplus(eta) = max(eta, 0) + log1p(exp(-|eta|))
  const double total = (rows.col(features_).array() * eta - eta.max(0.0) -
                        (-eta.abs()).exp().log1p())
                           .sum();
  if (std::isfinite(total)) return total;
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    if (!std::isfinite(row_log_lik(eta[j], rows(j, features_)))) {
      throw NumericalError("logistic: non-finite log-likelihood", j);
    }
  }
  throw NumericalError("logistic: log-likelihood sum overflowed");
}

Vector LogisticModel::sum_grad_log_lik(const Vector& theta, const RowMatrix& rows) const {
  check_theta(theta);
  const auto x = rows.leftCols(features_);
  const Vector eta = x * theta;
  Vector resid(rows.rows());
  for (Eigen::Index j = 0; j < rows.rows(); ++j) resid[j] = rows(j, features_) - sigmoid(eta[j]);
  return x.transpose() * resid;
}

Matrix LogisticModel::sum_hess_log_lik(const Vector& theta, const RowMatrix& rows) const {
  check_theta(theta);
  const auto x = rows.leftCols(features_);
  const Vector eta = x * theta;
  Vector w(rows.rows());
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    const double s = sigmoid(eta[j]);
    w[j] = s * (1.0 - s);
  }
  return -(x.transpose() * w.asDiagonal() * x);
}

}  // namespace psmc
