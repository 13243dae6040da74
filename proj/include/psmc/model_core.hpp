#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "psmc/errors.hpp"
#include "psmc/types.hpp"

namespace psmc {

/// A point in parameter space with one label per component.
struct ParameterVector {
  Vector values;
  std::vector<std::string> names;

  ParameterVector() = default;
  ParameterVector(Vector v, std::vector<std::string> n);

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
};

struct Dataset {
  RowMatrix rows;
  std::vector<std::string> columns;

  Eigen::Index n() const { return rows.rows(); }
  /// Throws PreconditionError unless n >= 1 and the column labels match the row width.
  void validate() const;
};

/// One of K equal, disjoint blocks of a dataset. Rows are shared and immutable.
struct DataShard {
  std::shared_ptr<const RowMatrix> rows;
  int replication = 1;
  int index = 0;

  Eigen::Index m() const { return rows ? rows->rows() : 0; }
  const RowMatrix& data() const { return *rows; }
};

DataShard make_shard(RowMatrix rows, int replication, int index);

/// Exponents applied to a shard's likelihood and to the prior.
struct TargetWeights {
  double likelihood = 1.0;
  double prior = 1.0;
};

/// exp{K l_i(theta)} pi(theta): each shard datum counted K times, full prior.
inline TargetWeights rescaled_weights(int replication) {
  return {static_cast<double>(replication), 1.0};
}

/// exp{l_i(theta)} pi(theta)^{1/K}: the product decomposition used by consensus Monte Carlo.
inline TargetWeights standard_weights(int replication) {
  return {1.0, 1.0 / static_cast<double>(replication)};
}

using LogTarget = std::function<double(const Vector&)>;

struct GradHess {
  Vector gradient;
  Matrix hessian;
};

/// Log-likelihood, prior, and derivative bundle for an i.i.d. model.
///
/// Implementations are immutable and safe to call from many threads.
class ModelSpec {
 public:
  virtual ~ModelSpec() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual std::vector<std::string> component_names() const = 0;
  /// Number of columns each data row must have.
  virtual int row_width() const = 0;

  virtual bool in_support(const Vector& theta) const;

  virtual double log_lik(const Vector& theta, Row row) const = 0;
  virtual Vector grad_log_lik(const Vector& theta, Row row) const = 0;
  virtual bool has_hessian() const { return false; }
  virtual Matrix hess_log_lik(const Vector& theta, Row row) const;

  virtual double log_prior(const Vector& theta) const = 0;
  virtual Vector grad_log_prior(const Vector& theta) const = 0;
  virtual Matrix hess_log_prior(const Vector& theta) const;

  /// Per-observation expected Fisher information, when known in closed form.
  virtual std::optional<Matrix> fisher_information(const Vector& theta) const;

  virtual Vector default_init() const;

  /// Coordinates used for reporting densities (defaults to the sampling coordinates).
  virtual Vector to_reported(const Vector& theta) const { return theta; }
  virtual std::vector<std::string> reported_names() const { return component_names(); }

  /// Sum of log f(x|theta) over a block. Throws NumericalError naming the first bad row.
  virtual double sum_log_lik(const Vector& theta, const RowMatrix& rows) const;
  virtual Vector sum_grad_log_lik(const Vector& theta, const RowMatrix& rows) const;
  virtual Matrix sum_hess_log_lik(const Vector& theta, const RowMatrix& rows) const;

  /// Weighted log posterior of a block, -inf off the support. The returned
  /// target keeps the rows alive.
  virtual LogTarget bind(std::shared_ptr<const RowMatrix> rows, TargetWeights weights) const;

  /// Gradient and Hessian of the weighted log posterior of a block.
  GradHess weighted_grad_hess(const Vector& theta, const RowMatrix& rows,
                              TargetWeights weights) const;

  ParameterVector make_parameter(Vector values) const;

 protected:
  void check_theta(const Vector& theta) const;
};

LogTarget bind_shard(const ModelSpec& model, const DataShard& shard, TargetWeights weights);

/// sum_j log f(x_ij | theta) over a shard. Requires m >= 1.
double shard_log_lik(const ModelSpec& model, const DataShard& shard, const ParameterVector& theta);

/// K * shard_log_lik + log prior, K = shard.replication (unnormalized).
double rescaled_log_post(const ModelSpec& model, const DataShard& shard,
                         const ParameterVector& theta);

/// Full-data log-likelihood plus log prior.
double full_log_post(const ModelSpec& model, const Dataset& data, const ParameterVector& theta);

}  // namespace psmc
