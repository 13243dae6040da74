#include "psmc/sampler.hpp"

namespace psmc {

ChainDraws exact_beta_sample(const BetaPosterior& posterior, int draws, Seed seed) {
  if (!(posterior.a > 0.0 && posterior.b > 0.0)) {
    throw PreconditionError("exact_beta_sample: Beta parameters must be positive");
  }
  if (draws < 1) throw PreconditionError("exact_beta_sample: need at least one draw");
  Rng rng(seed);
  ChainDraws out;
  out.draws.resize(draws, 1);
  for (int t = 0; t < draws; ++t) out.draws(t, 0) = dist::sample_beta(rng, posterior);
  out.seed = seed;
  out.acceptance_rate = 1.0;
  return out;
}

}  // namespace psmc
