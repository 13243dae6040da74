#include <algorithm>
#include <cmath>

#include "psmc/sampler.hpp"

namespace psmc {

void GibbsConfig::validate() const {
  if (total_iters < 1 || burn_in < 0 || burn_in >= total_iters) {
    throw ConfigurationError("gibbs: need 0 <= burn_in < total_iters");
  }
  if (thin < 1) throw ConfigurationError("gibbs: thin must be >= 1");
  if ((total_iters - burn_in) / thin < 1) throw ConfigurationError("gibbs: no draws retained");
  if (!(prior_power > 0.0)) throw ConfigurationError("gibbs: prior power must be positive");
  std::array<int, 5> seen{};
  for (MixtureBlock b : order) ++seen[static_cast<std::size_t>(b)];
  for (int c : seen) {
    if (c != 1) throw ConfigurationError("gibbs: sweep order must list each block once");
  }
}

ChainDraws gibbs_sample_mixture(const DataShard& shard, const MixtureHyperParams& hyper,
                                const GibbsConfig& config, Seed seed) {
  config.validate();
  hyper.validate();
  const int K = shard.replication;
  if (K < 1) throw PreconditionError("gibbs: replication < 1");
  if (shard.m() < 1) throw PreconditionError("gibbs: empty shard");
  const RowMatrix& rows = shard.data();
  if (rows.cols() != 3) throw DimensionMismatch("gibbs: mixture rows must be (x1, x2, y)");
  MixtureHyperParams prior = hyper.tempered(config.prior_power);
  // An inverse-gamma prior raised to a small power has shape below zero and leaves the
  // variance conditional improper whenever its component is empty; keep the shape at v * a.
  prior.alpha_sigma = std::max(prior.alpha_sigma, config.prior_power * hyper.alpha_sigma);
  prior.alpha_psi = std::max(prior.alpha_psi, config.prior_power * hyper.alpha_psi);

  MixtureModelState state;
  state.theta = config.init;
  const auto m = static_cast<std::size_t>(rows.rows());
  state.z.assign(m, config.latent_init == LatentInit::AllTrials ? K : 0);
  state.validate(K);

  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const int kept = (config.total_iters - config.burn_in) / config.thin;
  ChainDraws out;
  out.draws.resize(kept, 5);
  out.seed = seed;
  out.burn_in = config.burn_in;
  out.acceptance_rate = 1.0;
  out.shard_index = shard.index;
  long degenerate_sweeps = 0;

  // per-row products are fixed across sweeps; each sweep reduces them with w = K - z
  const Eigen::ArrayXd x1 = rows.col(0).array();
  const Eigen::ArrayXd x2 = rows.col(1).array();
  const Eigen::ArrayXd y = rows.col(2).array();
  const Eigen::ArrayXd x11 = x1 * x1;
  const Eigen::ArrayXd x22 = x2 * x2;
  const Eigen::ArrayXd x12 = x1 * x2;
  const Eigen::ArrayXd x1y = x1 * y;
  const Eigen::ArrayXd x2y = x2 * y;
  const Eigen::ArrayXd yy = y * y;
  Eigen::ArrayXd w(static_cast<Eigen::Index>(m));
  Eigen::ArrayXd noise_prob(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) w[static_cast<Eigen::Index>(j)] = K - state.z[j];

  Eigen::Index row = 0;
  for (int it = 0; it < config.total_iters; ++it) {
    const bool update_latent = it > 0 || config.latent_init == LatentInit::FromTheta;
    if (update_latent) {
      // log-odds of signal vs noise; exp overflow gives probability 0, its correct limit
      const MixtureParams& th = state.theta;
      const double offset = std::log1p(-th.p) - std::log(th.p) +
                            0.5 * (std::log(th.psi2) - std::log(th.sigma2));
      noise_prob = (1.0 + (offset - (y - th.alpha * x1 - th.beta * x2).square() * (0.5 / th.sigma2) +
                           yy * (0.5 / th.psi2))
                              .exp())
                       .inverse();
      for (std::size_t j = 0; j < m; ++j) {
        const double pj = noise_prob[static_cast<Eigen::Index>(j)];
        const int zj = K == 1 ? (uniform(rng) < pj ? 1 : 0) : dist::sample_binomial(rng, K, pj);
        state.z[j] = zj;
        w[static_cast<Eigen::Index>(j)] = K - zj;
      }
    }
    MixtureSuffStats stats;
    stats.sw = w.sum();
    stats.swx11 = (w * x11).sum();
    stats.swx22 = (w * x22).sum();
    stats.swx12 = (w * x12).sum();
    stats.swx1y = (w * x1y).sum();
    stats.swx2y = (w * x2y).sum();
    stats.swyy = (w * yy).sum();
    stats.sz = static_cast<double>(K) * static_cast<double>(m) - stats.sw;
    stats.szyy = ((static_cast<double>(K) - w) * yy).sum();
    if (stats.sw == 0.0) ++degenerate_sweeps;

    MixtureParams& t = state.theta;
    for (MixtureBlock block : config.order) {
      switch (block) {
        case MixtureBlock::Alpha:
          t.alpha = dist::sample_normal(rng, alpha_conditional(t, stats, prior));
          break;
        case MixtureBlock::Beta:
          t.beta = dist::sample_normal(rng, beta_conditional(t, stats, prior));
          break;
        case MixtureBlock::Sigma2:
          t.sigma2 = dist::sample_inverse_gamma(rng, sigma2_conditional(t, stats, prior));
          break;
        case MixtureBlock::Psi2:
          t.psi2 = dist::sample_inverse_gamma(rng, psi2_conditional(stats, prior));
          break;
        case MixtureBlock::P:
          t.p = dist::sample_beta(rng, p_conditional(stats, prior));
          break;
      }
    }
    // a Beta draw can round to the boundary when one count dominates
    t.p = std::clamp(t.p, 1e-300, 1.0 - 1e-16);
    t.sigma2 = std::max(t.sigma2, 1e-300);
    t.psi2 = std::max(t.psi2, 1e-300);

    if (it >= config.burn_in && (it - config.burn_in + 1) % config.thin == 0 && row < kept) {
      out.draws.row(row++) = t.to_vector().transpose();
    }
  }
  if (degenerate_sweeps > 0) {
    out.warnings.push_back("gibbs: " + std::to_string(degenerate_sweeps) +
                           " sweep(s) assigned every row to the noise component; "
                           "alpha/beta/sigma2 drawn from their priors");
  }
  if (!out.draws.allFinite()) throw NumericalError("gibbs: non-finite draw");
  return out;
}

}  // namespace psmc
