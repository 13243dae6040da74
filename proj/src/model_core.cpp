#include "psmc/model_core.hpp"

#include <cmath>
#include <limits>

namespace psmc {

ParameterVector::ParameterVector(Vector v, std::vector<std::string> n)
    : values(std::move(v)), names(std::move(n)) {
  if (static_cast<Eigen::Index>(names.size()) != values.size()) {
    throw DimensionMismatch("parameter vector has " + std::to_string(values.size()) +
                            " values but " + std::to_string(names.size()) + " names");
  }
  if (!values.allFinite()) throw NumericalError("parameter vector has non-finite entries");
}

void Dataset::validate() const {
  if (n() < 1) throw PreconditionError("dataset is empty");
  if (static_cast<Eigen::Index>(columns.size()) != rows.cols()) {
    throw PreconditionError("dataset has " + std::to_string(rows.cols()) + " columns but " +
                            std::to_string(columns.size()) + " labels");
  }
}

DataShard make_shard(RowMatrix rows, int replication, int index) {
  if (replication < 1) throw PreconditionError("replication must be >= 1");
  return DataShard{std::make_shared<const RowMatrix>(std::move(rows)), replication, index};
}

bool ModelSpec::in_support(const Vector&) const { return true; }

Matrix ModelSpec::hess_log_lik(const Vector&, Row) const {
  throw ConfigurationError("model '" + name() + "' provides no Hessian");
}

Matrix ModelSpec::hess_log_prior(const Vector&) const {
  throw ConfigurationError("model '" + name() + "' provides no Hessian");
}

std::optional<Matrix> ModelSpec::fisher_information(const Vector&) const { return std::nullopt; }

Vector ModelSpec::default_init() const { return Vector::Zero(dim()); }

void ModelSpec::check_theta(const Vector& theta) const {
  if (theta.size() != dim()) {
    throw DimensionMismatch(name() + ": theta has dimension " + std::to_string(theta.size()) +
                            ", expected " + std::to_string(dim()));
  }
}

double ModelSpec::sum_log_lik(const Vector& theta, const RowMatrix& rows) const {
  double total = 0.0;
  for (Eigen::Index j = 0; j < rows.rows(); ++j) total += log_lik(theta, row_of(rows, j));
  if (std::isfinite(total)) return total;
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    if (!std::isfinite(log_lik(theta, row_of(rows, j)))) {
      throw NumericalError(name() + ": non-finite log-likelihood", j);
    }
  }
  throw NumericalError(name() + ": log-likelihood sum overflowed");
}

Vector ModelSpec::sum_grad_log_lik(const Vector& theta, const RowMatrix& rows) const {
  Vector g = Vector::Zero(dim());
  for (Eigen::Index j = 0; j < rows.rows(); ++j) g += grad_log_lik(theta, row_of(rows, j));
  return g;
}

Matrix ModelSpec::sum_hess_log_lik(const Vector& theta, const RowMatrix& rows) const {
  Matrix h = Matrix::Zero(dim(), dim());
  for (Eigen::Index j = 0; j < rows.rows(); ++j) h += hess_log_lik(theta, row_of(rows, j));
  return h;
}

LogTarget ModelSpec::bind(std::shared_ptr<const RowMatrix> rows, TargetWeights weights) const {
  if (!rows || rows->rows() < 1) throw PreconditionError("cannot bind an empty shard");
  if (rows->cols() != row_width()) {
    throw DimensionMismatch(name() + ": rows have " + std::to_string(rows->cols()) +
                            " columns, expected " + std::to_string(row_width()));
  }
  return [this, rows = std::move(rows), weights](const Vector& theta) {
    if (!in_support(theta)) return -std::numeric_limits<double>::infinity();
    return weights.likelihood * sum_log_lik(theta, *rows) + weights.prior * log_prior(theta);
  };
}

GradHess ModelSpec::weighted_grad_hess(const Vector& theta, const RowMatrix& rows,
                                       TargetWeights weights) const {
  check_theta(theta);
  GradHess out;
  out.gradient = weights.likelihood * sum_grad_log_lik(theta, rows) +
                 weights.prior * grad_log_prior(theta);
  out.hessian = weights.likelihood * sum_hess_log_lik(theta, rows) +
                weights.prior * hess_log_prior(theta);
  return out;
}

ParameterVector ModelSpec::make_parameter(Vector values) const {
  check_theta(values);
  return ParameterVector(std::move(values), component_names());
}

LogTarget bind_shard(const ModelSpec& model, const DataShard& shard, TargetWeights weights) {
  return model.bind(shard.rows, weights);
}

double shard_log_lik(const ModelSpec& model, const DataShard& shard, const ParameterVector& theta) {
  if (shard.m() < 1) throw PreconditionError("shard_log_lik: empty shard");
  if (theta.size() != model.dim()) {
    throw DimensionMismatch("shard_log_lik: theta dimension " + std::to_string(theta.size()) +
                            " != model dimension " + std::to_string(model.dim()));
  }
  return model.sum_log_lik(theta.values, shard.data());
}

double rescaled_log_post(const ModelSpec& model, const DataShard& shard,
                         const ParameterVector& theta) {
  if (shard.replication < 1) throw PreconditionError("rescaled_log_post: replication < 1");
  const double value = shard.replication * shard_log_lik(model, shard, theta) +
                       model.log_prior(theta.values);
  if (!std::isfinite(value)) throw NumericalError("rescaled_log_post: non-finite log prior");
  return value;
}

double full_log_post(const ModelSpec& model, const Dataset& data, const ParameterVector& theta) {
  data.validate();
  if (theta.size() != model.dim()) {
    throw DimensionMismatch("full_log_post: theta dimension mismatch");
  }
  const double value = model.sum_log_lik(theta.values, data.rows) + model.log_prior(theta.values);
  if (!std::isfinite(value)) throw NumericalError("full_log_post: non-finite log prior");
  return value;
}

}  // namespace psmc
