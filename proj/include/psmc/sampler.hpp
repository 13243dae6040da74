#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "psmc/model_core.hpp"
#include "psmc/models.hpp"

namespace psmc {

/// Random-walk proposal: theta' = theta + exp(log_scale) * chol * z.
struct KernelState {
  double log_scale = 0.0;
  Matrix chol;

  bool operator==(const KernelState& other) const {
    return log_scale == other.log_scale && chol == other.chol;
  }
};

/// Post-burn-in draws of one chain, one row per retained iteration.
struct ChainDraws {
  Matrix draws;
  int shard_index = 0;
  Seed seed = 0;
  int burn_in = 0;
  double acceptance_rate = 1.0;
  std::vector<std::string> warnings;
  /// Random-walk chains only: the kernel when burn-in ended and after the last iteration.
  std::optional<KernelState> kernel_at_burn_in;
  std::optional<KernelState> kernel_final;

  Eigen::Index size() const { return draws.rows(); }
  Eigen::Index dim() const { return draws.cols(); }
  Vector mean() const;
  /// Unbiased sample covariance (T - 1 denominator).
  Matrix covariance() const;
};

struct RwmConfig {
  int total_iters = 20000;
  int burn_in = 5000;
  int thin = 1;
  Vector init;
  /// Starting proposal covariance; identity when absent.
  std::optional<Matrix> init_cov;
  /// Defaults to 0.44 for d = 1 and 0.234 otherwise.
  std::optional<double> target_accept;
  /// Burn-in iterations between refreshes of the empirical proposal covariance.
  int adapt_window = 200;
  /// Consecutive iterations with no acceptance that abort the chain.
  int stuck_window = 1000;

  void validate(Eigen::Index dim) const;
  double accept_target(Eigen::Index dim) const;
};

/// Adaptive random-walk Metropolis. The scale (Robbins-Monro on log scale) and the
/// proposal covariance adapt during burn-in only; afterwards the kernel is fixed.
ChainDraws rwm_sample(const LogTarget& target, const RwmConfig& config, Seed seed);

enum class MixtureBlock { Alpha, Beta, Sigma2, Psi2, P };

enum class LatentInit {
  /// Draw z from its conditional at the initial theta (regular sweep from the start).
  FromTheta,
  AllZero,
  /// Every count at the replication factor K.
  AllTrials,
};

struct GibbsConfig {
  int total_iters = 5000;
  int burn_in = 1000;
  int thin = 1;
  MixtureParams init{0.0, 0.0, 1.0, 1.0, 0.5};
  LatentInit latent_init = LatentInit::FromTheta;
  /// Order of the parameter blocks after the latent update.
  std::array<MixtureBlock, 5> order{MixtureBlock::Alpha, MixtureBlock::Beta, MixtureBlock::Sigma2,
                                    MixtureBlock::Psi2, MixtureBlock::P};
  /// Exponent on the prior (1 for rescaled subposteriors, 1/K for the product decomposition).
  double prior_power = 1.0;

  void validate() const;
};

/// Gibbs sampler for the regression mixture on a shard whose rows count
/// shard.replication times. Records (alpha, beta, sigma2, psi2, p) only.
ChainDraws gibbs_sample_mixture(const DataShard& shard, const MixtureHyperParams& hyper,
                                const GibbsConfig& config, Seed seed);

/// T independent draws from a Beta distribution.
ChainDraws exact_beta_sample(const BetaPosterior& posterior, int draws, Seed seed);

}  // namespace psmc
