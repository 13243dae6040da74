#include <cmath>
#include <future>
#include <thread>

#include "psmc/combiner.hpp"

namespace psmc {

std::string to_string(NewtonStatus status) {
  switch (status) {
    case NewtonStatus::Converged: return "converged";
    case NewtonStatus::MaxIterations: return "max_iterations";
    case NewtonStatus::SingularHessian: return "singular_hessian";
    case NewtonStatus::NonFiniteStep: return "non_finite_step";
  }
  return "?";
}

NewtonResult newton_maximize(const GradHessFn& grad_hess, const Vector& init, int max_iters,
                             double tol, double max_condition) {
  if (max_iters < 0) throw ConfigurationError("newton: max_iters must be >= 0");
  NewtonResult result;
  result.center = init;
  Vector theta = init;

  auto fail = [&](NewtonStatus status, std::string message) {
    result.status = status;
    result.message = std::move(message);
    result.center = init;
    result.trace.converged = false;
    return result;
  };

  for (int k = 0;; ++k) {
    const GradHess gh = grad_hess(theta);
    const double gnorm = gh.gradient.norm();
    if (!std::isfinite(gnorm) || !gh.hessian.allFinite()) {
      return fail(NewtonStatus::NonFiniteStep, "non-finite gradient or Hessian at iterate " +
                                                   std::to_string(k));
    }
    result.trace.iterates.push_back(theta);
    result.trace.gradient_norms.push_back(gnorm);
    if (gnorm < tol) {
      result.status = NewtonStatus::Converged;
      result.trace.converged = true;
      result.center = theta;
      return result;
    }
    if (k == max_iters) {
      result.status = NewtonStatus::MaxIterations;
      result.center = theta;
      return result;
    }

    const Matrix h = 0.5 * (gh.hessian + gh.hessian.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    const Vector abs_eig = eig.eigenvalues().cwiseAbs();
    const double lo = abs_eig.minCoeff();
    result.condition = lo > 0.0 ? abs_eig.maxCoeff() / lo : INFINITY;
    if (!(result.condition <= max_condition)) {
      return fail(NewtonStatus::SingularHessian,
                  "Hessian condition estimate " + std::to_string(result.condition) +
                      " exceeds " + std::to_string(max_condition));
    }
    const Vector step = Eigen::LDLT<Matrix>(h).solve(gh.gradient);
    if (!step.allFinite()) {
      return fail(NewtonStatus::NonFiniteStep, "non-finite Newton step at iterate " +
                                                   std::to_string(k));
    }
    theta -= step;
  }
}

NewtonResult refine_center_newton(const ModelSpec& model, const std::vector<DataShard>& shards,
                                  const Vector& init, int max_iters, double tol, int workers) {
  if (!model.has_hessian()) {
    throw ConfigurationError("Newton refinement needs a model Hessian; '" + model.name() +
                             "' has none");
  }
  if (shards.empty()) throw PreconditionError("refine_center_newton: no shards");
  if (init.size() != model.dim()) throw DimensionMismatch("refine_center_newton: init dimension");
  const TargetWeights lik_only{1.0, 0.0};
  const bool parallel = workers != 1 && shards.size() > 1;

  auto grad_hess = [&](const Vector& theta) {
    std::vector<GradHess> parts(shards.size());
    if (parallel) {
      std::vector<std::future<GradHess>> futures;
      futures.reserve(shards.size());
      for (const auto& s : shards) {
        futures.push_back(std::async(std::launch::async, [&model, &s, &theta, lik_only] {
          return model.weighted_grad_hess(theta, s.data(), lik_only);
        }));
      }
      for (std::size_t i = 0; i < shards.size(); ++i) parts[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < shards.size(); ++i) {
        parts[i] = model.weighted_grad_hess(theta, shards[i].data(), lik_only);
      }
    }
    // fixed shard-order reduction
    GradHess total{model.grad_log_prior(theta), model.hess_log_prior(theta)};
    for (const auto& p : parts) {
      total.gradient += p.gradient;
      total.hessian += p.hessian;
    }
    return total;
  };
  return newton_maximize(grad_hess, init, max_iters, tol);
}

NewtonResult refine_center_newton(const ModelSpec& model, const Dataset& data, const Vector& init,
                                  int max_iters, double tol) {
  data.validate();
  std::vector<DataShard> whole{make_shard(data.rows, 1, 0)};
  return refine_center_newton(model, whole, init, max_iters, tol, 1);
}

}  // namespace psmc
