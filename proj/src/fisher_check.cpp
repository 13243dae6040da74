#include "psmc/metrics.hpp"

namespace psmc {

double relative_frobenius(const Matrix& a, const Matrix& ref) {
  if (a.rows() != ref.rows() || a.cols() != ref.cols()) {
    throw DimensionMismatch("relative_frobenius: shapes differ");
  }
  const double denom = ref.norm();
  if (!(denom > 0.0)) throw NumericalError("relative_frobenius: reference matrix is zero");
  return (a - ref).norm() / denom;
}

namespace {

Matrix invert_information(const Matrix& info, const std::string& what) {
  Eigen::LLT<Matrix> llt(info);
  if (llt.info() != Eigen::Success) {
    throw SingularInformation(what + ": information matrix is not positive definite");
  }
  return llt.solve(Matrix::Identity(info.rows(), info.cols()));
}

}  // namespace

CheckReport fisher_covariance_check(const ModelSpec& model, const SubposteriorResult& sub,
                                    const std::vector<DataShard>& shards,
                                    const CombinedSample& combined, Eigen::Index N) {
  if (!model.has_hessian()) {
    throw ConfigurationError("fisher_covariance_check needs a model Hessian");
  }
  if (static_cast<int>(shards.size()) != sub.K()) {
    throw DimensionMismatch("fisher_covariance_check: shard count differs from chain count");
  }
  if (N < 1) throw PreconditionError("fisher_covariance_check: N must be positive");
  const Eigen::Index d = model.dim();
  if (combined.draws.cols() != d) throw DimensionMismatch("combined draws have wrong dimension");

  CheckReport report;
  const Matrix centered = combined.draws.rowwise() - combined.draws.colwise().mean();
  report.scaled_cov = static_cast<double>(N) * (centered.transpose() * centered) /
                      static_cast<double>(combined.draws.rows() - 1);

  report.avg_inverse_info = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < shards.size(); ++i) {
    const Matrix info = -model.sum_hess_log_lik(sub.shard_means[i], shards[i].data()) /
                        static_cast<double>(shards[i].m());
    report.avg_inverse_info += invert_information(info, "shard " + std::to_string(i));
  }
  report.avg_inverse_info /= static_cast<double>(shards.size());

  if (auto closed = model.fisher_information(combined.center)) {
    report.analytic_info = true;
    report.inverse_info = invert_information(*closed, "closed-form information");
  } else {
    Matrix info = Matrix::Zero(d, d);
    Eigen::Index rows = 0;
    for (const auto& s : shards) {
      info -= model.sum_hess_log_lik(combined.center, s.data());
      rows += s.m();
    }
    report.inverse_info = invert_information(info / static_cast<double>(rows), "observed");
  }

  report.scaled_vs_avg = relative_frobenius(report.scaled_cov, report.avg_inverse_info);
  report.scaled_vs_info = relative_frobenius(report.scaled_cov, report.inverse_info);
  report.avg_vs_info = relative_frobenius(report.avg_inverse_info, report.inverse_info);
  return report;
}

}  // namespace psmc
