#include "psmc/shard_runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <optional>
#include <thread>

#include "psmc/combiner.hpp"

namespace psmc {

ShardPlan plan_shards(Eigen::Index n, int K, Seed master_seed) {
  if (K < 1) throw ShardSizeError("K must be >= 1");
  if (n < 1) throw PreconditionError("cannot shard an empty dataset");
  if (n % K != 0) {
    throw ShardSizeError("K = " + std::to_string(K) + " does not divide N = " + std::to_string(n));
  }
  ShardPlan plan;
  plan.K = K;
  plan.master_seed = master_seed;
  plan.permutation.resize(static_cast<std::size_t>(n));
  std::iota(plan.permutation.begin(), plan.permutation.end(), Eigen::Index{0});
  Rng rng(master_seed);
  std::shuffle(plan.permutation.begin(), plan.permutation.end(), rng);
  return plan;
}

std::vector<DataShard> make_shards(const Dataset& data, int K, Seed master_seed) {
  data.validate();
  const ShardPlan plan = plan_shards(data.n(), K, master_seed);
  const Eigen::Index m = plan.shard_size();
  std::vector<DataShard> shards;
  shards.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    RowMatrix rows(m, data.rows.cols());
    for (Eigen::Index j = 0; j < m; ++j) {
      rows.row(j) = data.rows.row(plan.permutation[static_cast<std::size_t>(k * m + j)]);
    }
    shards.push_back(make_shard(std::move(rows), K, k));
  }
  return shards;
}

SubposteriorResult summarize_chains(std::vector<ChainDraws> chains) {
  SubposteriorResult out;
  for (const auto& c : chains) {
    if (c.size() < 1) throw PreconditionError("chain has no draws");
    if (c.dim() != chains.front().dim()) throw DimensionMismatch("chains differ in dimension");
    out.shard_means.push_back(c.mean());
    out.shard_covs.push_back(c.covariance());
  }
  out.chains = std::move(chains);
  return out;
}

TargetWeights weights_for(SubposteriorKind kind, int replication) {
  return kind == SubposteriorKind::Rescaled ? rescaled_weights(replication)
                                            : standard_weights(replication);
}

SubposteriorResult run_subposteriors(const ShardChainFn& chain, const std::vector<DataShard>& shards,
                                     const RunOptions& options) {
  if (shards.empty()) throw PreconditionError("run_subposteriors: no shards");
  const std::size_t K = shards.size();
  std::vector<std::optional<ChainDraws>> results(K);
  std::vector<std::string> errors(K);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < K; i = next++) {
      try {
        ChainDraws draws = chain(shards[i], chain_seed(options.master_seed, shards[i].index));
        draws.shard_index = shards[i].index;
        results[i] = std::move(draws);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      } catch (...) {
        errors[i] = "unknown error";
      }
    }
  };

  std::size_t workers = options.workers > 0 ? static_cast<std::size_t>(options.workers)
                                            : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, K);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<ShardRunError::Failure> failures;
  std::vector<ChainDraws> chains;
  for (std::size_t i = 0; i < K; ++i) {
    if (!results[i]) {
      failures.push_back({shards[i].index, errors[i]});
    } else {
      chains.push_back(std::move(*results[i]));
    }
  }
  if (!failures.empty()) throw ShardRunError(std::move(failures));
  return summarize_chains(std::move(chains));
}

ShardChainFn rwm_chain(const ModelSpec& model, RwmConfig base, SubposteriorKind kind,
                       bool newton_init) {
  return [&model, base = std::move(base), kind, newton_init](const DataShard& shard, Seed seed) {
    const TargetWeights w = weights_for(kind, shard.replication);
    RwmConfig cfg = base;
    if (cfg.init.size() == 0) cfg.init = model.default_init();
    if (newton_init && model.has_hessian()) {
      const NewtonResult mode = newton_maximize(
          [&](const Vector& t) { return model.weighted_grad_hess(t, shard.data(), w); }, cfg.init,
          50, 1e-8);
      if (!mode.failed() && model.in_support(mode.center)) {
        cfg.init = mode.center;
        const GradHess gh = model.weighted_grad_hess(cfg.init, shard.data(), w);
        Eigen::LLT<Matrix> llt(-gh.hessian);
        if (llt.info() == Eigen::Success) {
          cfg.init_cov = llt.solve(Matrix::Identity(model.dim(), model.dim()));
        }
      }
    }
    return rwm_sample(bind_shard(model, shard, w), cfg, seed);
  };
}

ShardChainFn gibbs_chain(MixtureHyperParams hyper, GibbsConfig base, SubposteriorKind kind) {
  return [hyper, base, kind](const DataShard& shard, Seed seed) {
    GibbsConfig cfg = base;
    DataShard target = shard;
    if (kind == SubposteriorKind::Standard) {
      target.replication = 1;
      cfg.prior_power = 1.0 / static_cast<double>(shard.replication);
    }
    return gibbs_sample_mixture(target, hyper, cfg, seed);
  };
}

ShardChainFn beta_chain(const BernoulliModel& model, int draws, SubposteriorKind kind) {
  const double a0 = model.a0();
  const double b0 = model.b0();
  return [a0, b0, draws, kind](const DataShard& shard, Seed seed) {
    const BetaPosterior post =
        beta_bernoulli_posterior(shard, weights_for(kind, shard.replication), a0, b0);
    return exact_beta_sample(post, draws, seed);
  };
}

}  // namespace psmc
