#include <cmath>
#include <limits>

#include "psmc/sampler.hpp"

namespace psmc {

Vector ChainDraws::mean() const { return draws.colwise().mean().transpose(); }

Matrix ChainDraws::covariance() const {
  if (draws.rows() < 2) return Matrix::Zero(draws.cols(), draws.cols());
  const Matrix centered = draws.rowwise() - draws.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(draws.rows() - 1);
}

void RwmConfig::validate(Eigen::Index dim) const {
  if (total_iters < 1 || burn_in < 0 || burn_in >= total_iters) {
    throw ConfigurationError("rwm: need 0 <= burn_in < total_iters");
  }
  if (thin < 1) throw ConfigurationError("rwm: thin must be >= 1");
  if ((total_iters - burn_in) / thin < 1) throw ConfigurationError("rwm: no draws retained");
  if (init.size() != dim) throw DimensionMismatch("rwm: init has wrong dimension");
  if (init_cov && (init_cov->rows() != dim || init_cov->cols() != dim)) {
    throw DimensionMismatch("rwm: init_cov has wrong shape");
  }
  if (adapt_window < 1 || stuck_window < 1) throw ConfigurationError("rwm: windows must be >= 1");
  if (target_accept && !(*target_accept > 0.0 && *target_accept < 1.0)) {
    throw ConfigurationError("rwm: target acceptance must lie in (0, 1)");
  }
}

double RwmConfig::accept_target(Eigen::Index dim) const {
  if (target_accept) return *target_accept;
  return dim == 1 ? 0.44 : 0.234;
}

namespace {

std::optional<Matrix> cholesky_of(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix l = llt.matrixL();
  if (!l.allFinite()) return std::nullopt;
  return l;
}

}  // namespace

ChainDraws rwm_sample(const LogTarget& target, const RwmConfig& config, Seed seed) {
  const Eigen::Index d = config.init.size();
  if (d < 1) throw DimensionMismatch("rwm: empty init");
  config.validate(d);

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Vector state = config.init;
  double log_p = target(state);
  if (!std::isfinite(log_p)) {
    throw InitializationError("rwm: target is not finite at the initial point");
  }

  KernelState kernel;
  kernel.log_scale = std::log(2.38 / std::sqrt(static_cast<double>(d)));
  {
    const Matrix start = config.init_cov.value_or(Matrix::Identity(d, d));
    auto l = cholesky_of(start);
    if (!l) throw ConfigurationError("rwm: initial proposal covariance is not positive definite");
    kernel.chol = *l;
  }
  const double accept_target = config.accept_target(d);

  // Welford accumulators over burn-in states
  Vector run_mean = Vector::Zero(d);
  Matrix run_m2 = Matrix::Zero(d, d);
  long run_n = 0;

  const int kept = (config.total_iters - config.burn_in) / config.thin;
  ChainDraws out;
  out.draws.resize(kept, d);
  out.seed = seed;
  out.burn_in = config.burn_in;

  Vector z(d);
  Vector proposal(d);
  long accepted_after_burn = 0;
  int since_accept = 0;
  Eigen::Index row = 0;

  for (int it = 0; it < config.total_iters; ++it) {
    for (Eigen::Index k = 0; k < d; ++k) z[k] = normal(rng);
    proposal.noalias() = state + std::exp(kernel.log_scale) * (kernel.chol * z);
    const double log_q = target(proposal);
    double accept_prob = 0.0;
    if (std::isfinite(log_q)) accept_prob = log_q >= log_p ? 1.0 : std::exp(log_q - log_p);
    const bool accept = accept_prob >= 1.0 || uniform(rng) < accept_prob;
    if (accept) {
      state = proposal;
      log_p = log_q;
      since_accept = 0;
    } else if (++since_accept >= config.stuck_window) {
      throw StuckChainError("rwm: no proposal accepted in " +
                            std::to_string(config.stuck_window) + " iterations (iteration " +
                            std::to_string(it) + ")");
    }

    if (it < config.burn_in) {
      const double gain = std::pow(static_cast<double>(it + 1), -0.6);
      kernel.log_scale += gain * (accept_prob - accept_target);
      ++run_n;
      const Vector delta = state - run_mean;
      run_mean += delta / static_cast<double>(run_n);
      run_m2.noalias() += delta * (state - run_mean).transpose();
      if ((it + 1) % config.adapt_window == 0 && run_n >= 2 * config.adapt_window) {
        Matrix cov = run_m2 / static_cast<double>(run_n - 1);
        cov = 0.5 * (cov + cov.transpose());
        const double jitter = 1e-10 * std::max(cov.diagonal().mean(), 1e-300);
        cov.diagonal().array() += jitter;
        if (auto l = cholesky_of(cov)) kernel.chol = *l;
      }
      if (it + 1 == config.burn_in) out.kernel_at_burn_in = kernel;
      continue;
    }

    if (accept) ++accepted_after_burn;
    if ((it - config.burn_in + 1) % config.thin == 0 && row < kept) {
      out.draws.row(row++) = state.transpose();
    }
  }
  if (config.burn_in == 0) out.kernel_at_burn_in = kernel;
  out.kernel_final = kernel;
  out.acceptance_rate = static_cast<double>(accepted_after_burn) /
                        static_cast<double>(config.total_iters - config.burn_in);
  if (!out.draws.allFinite()) throw NumericalError("rwm: non-finite draw");
  return out;
}

}  // namespace psmc
