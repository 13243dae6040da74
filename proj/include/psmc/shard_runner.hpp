#pragma once

#include <functional>
#include <vector>

#include "psmc/model_core.hpp"
#include "psmc/sampler.hpp"

namespace psmc {

/// Row-to-shard assignment: rows permutation[k*M .. (k+1)*M) go to shard k.
struct ShardPlan {
  int K = 1;
  std::vector<Eigen::Index> permutation;
  Seed master_seed = 0;

  Eigen::Index shard_size() const {
    return static_cast<Eigen::Index>(permutation.size()) / K;
  }
};

/// Throws ShardSizeError unless K >= 1 divides n.
ShardPlan plan_shards(Eigen::Index n, int K, Seed master_seed);

/// Seeded shuffle then contiguous split into K shards of N / K rows, each with replication K.
std::vector<DataShard> make_shards(const Dataset& data, int K, Seed master_seed);

struct SubposteriorResult {
  std::vector<ChainDraws> chains;
  std::vector<Vector> shard_means;
  std::vector<Matrix> shard_covs;

  int K() const { return static_cast<int>(chains.size()); }
  Eigen::Index dim() const { return chains.empty() ? 0 : chains.front().dim(); }
};

/// Builds the result from finished chains (means and covariances recomputed from the draws).
SubposteriorResult summarize_chains(std::vector<ChainDraws> chains);

/// Which subposterior a chain targets.
enum class SubposteriorKind {
  /// exp{K l_i} pi: the recentring combiner's input.
  Rescaled,
  /// exp{l_i} pi^{1/K}: consensus Monte Carlo's input.
  Standard,
};

TargetWeights weights_for(SubposteriorKind kind, int replication);

/// Runs one chain for one shard with the given seed.
using ShardChainFn = std::function<ChainDraws(const DataShard&, Seed)>;

inline Seed chain_seed(Seed master_seed, int shard_index) {
  return master_seed + static_cast<Seed>(shard_index);
}

struct RunOptions {
  Seed master_seed = 1;
  /// Worker threads; 0 picks hardware concurrency. Never more than K.
  int workers = 0;
};

/// One chain per shard on a worker pool; results are gathered by shard index and do
/// not depend on the worker count. Every shard failure is collected into ShardRunError.
SubposteriorResult run_subposteriors(const ShardChainFn& chain, const std::vector<DataShard>& shards,
                                     const RunOptions& options);

/// Random-walk chain on a model's subposterior. With newton_init the chain starts at the
/// subposterior mode with the inverse negative Hessian as proposal covariance (models
/// without Hessians start from base.init).
ShardChainFn rwm_chain(const ModelSpec& model, RwmConfig base, SubposteriorKind kind,
                       bool newton_init = true);

/// Gibbs chain on the mixture subposterior.
ShardChainFn gibbs_chain(MixtureHyperParams hyper, GibbsConfig base, SubposteriorKind kind);

/// Exact Beta draws of a Bernoulli subposterior.
ShardChainFn beta_chain(const BernoulliModel& model, int draws, SubposteriorKind kind);

}  // namespace psmc
