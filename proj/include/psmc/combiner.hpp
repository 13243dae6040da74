#pragma once

#include <functional>
#include <string>
#include <vector>

#include "psmc/model_core.hpp"
#include "psmc/shard_runner.hpp"

namespace psmc {

enum class CombineMethod { AR, ARNR, CMC };

std::string to_string(CombineMethod method);
/// Accepts "AR", "AR+NR", "CMC".
CombineMethod parse_method(const std::string& text);

struct CombinedSample {
  Matrix draws;
  Vector center;
  CombineMethod method = CombineMethod::AR;
  /// Row where each input chain starts in draws.
  std::vector<Eigen::Index> chain_offsets;
  std::vector<std::string> warnings;
};

/// Average of the shard means, (1/K) sum_i theta*_i.
Vector common_center(const SubposteriorResult& sub);

/// Shifts chain i by (center - theta*_i) and pools every draw.
CombinedSample recenter(const SubposteriorResult& sub, const Vector& center, CombineMethod tag);

/// Recentres each subposterior at the common mean and pools (center = common_center).
CombinedSample combine_ar(const SubposteriorResult& sub);

/// Draw-wise precision-weighted average with W_i the inverse shard sample covariance.
/// Chains are trimmed to the shortest length. If any covariance is singular every
/// weight falls back to the identity and a warning is recorded.
CombinedSample combine_cmc(const SubposteriorResult& sub);

struct NewtonTrace {
  std::vector<Vector> iterates;
  std::vector<double> gradient_norms;
  bool converged = false;
};

enum class NewtonStatus { Converged, MaxIterations, SingularHessian, NonFiniteStep };

std::string to_string(NewtonStatus status);

struct NewtonResult {
  /// Refined point, or the initial point when the iteration failed.
  Vector center;
  NewtonTrace trace;
  NewtonStatus status = NewtonStatus::MaxIterations;
  /// Condition number of the last factorized Hessian.
  double condition = 0.0;
  std::string message;

  bool failed() const {
    return status == NewtonStatus::SingularHessian || status == NewtonStatus::NonFiniteStep;
  }
};

using GradHessFn = std::function<GradHess(const Vector&)>;

inline constexpr double kMaxHessianCondition = 1e12;

/// theta <- theta - H^{-1} g until ||g||_2 < tol or max_iters steps.
NewtonResult newton_maximize(const GradHessFn& grad_hess, const Vector& init, int max_iters,
                             double tol, double max_condition = kMaxHessianCondition);

/// Newton refinement of the combined center on the full-data log posterior. Gradient and
/// Hessian are accumulated per shard concurrently and reduced in shard order.
NewtonResult refine_center_newton(const ModelSpec& model, const std::vector<DataShard>& shards,
                                  const Vector& init, int max_iters, double tol, int workers = 0);

NewtonResult refine_center_newton(const ModelSpec& model, const Dataset& data, const Vector& init,
                                  int max_iters, double tol);

/// KL divergence between N(mu1, Sigma) and N(mu2, Sigma).
double gaussian_kl(const Vector& mu1, const Vector& mu2, const Matrix& sigma);

/// Upper bound 2 sqrt(KL) on total variation.
double tv_bound_from_kl(double kl);

}  // namespace psmc
