#include <cmath>

#include <gtest/gtest.h>

#include "psmc/combiner.hpp"
#include "psmc/datagen.hpp"
#include "psmc/metrics.hpp"
#include "support/fixtures.hpp"

using namespace psmc;
using psmc::testing::vec;

namespace {

ChainDraws gaussian_chain(const Vector& mean, const Matrix& chol, Eigen::Index T, Seed seed,
                          int index) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ChainDraws c;
  c.draws.resize(T, mean.size());
  for (Eigen::Index t = 0; t < T; ++t) {
    Vector z(mean.size());
    for (auto& v : z) v = n(rng);
    c.draws.row(t) = (mean + chol * z).transpose();
  }
  c.shard_index = index;
  c.seed = seed;
  return c;
}

SubposteriorResult random_sub(int K, Eigen::Index d, Eigen::Index T, Seed seed) {
  std::vector<ChainDraws> chains;
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < K; ++k) {
    Vector mean(d);
    for (auto& v : mean) v = 3.0 * n(rng);
    Matrix a = Matrix::Random(d, d) * 0.3;
    a.diagonal().array() += 1.0;
    chains.push_back(gaussian_chain(mean, a, T + 7 * k, seed + k, k));
  }
  return summarize_chains(std::move(chains));
}

// KL(N(m1, S1) || N(m2, S2)), the general formula
double general_kl(const Vector& m1, const Matrix& S1, const Vector& m2, const Matrix& S2) {
  const Matrix S2inv = S2.inverse();
  const Vector d = m2 - m1;
  return 0.5 * ((S2inv * S1).trace() + d.dot(S2inv * d) - static_cast<double>(m1.size()) +
                std::log(S2.determinant() / S1.determinant()));
}

}  // namespace

TEST(CombineAr, SingleChainIsUnchanged) {
  const auto sub = random_sub(1, 3, 500, 1);
  const CombinedSample out = combine_ar(sub);
  EXPECT_TRUE(out.draws == sub.chains[0].draws);
  EXPECT_EQ(out.center, sub.shard_means[0]);
}

TEST(CombineAr, TwoChainArithmetic) {
  ChainDraws a;
  a.draws = psmc::testing::rows_of({{-1, 0}, {1, 0}, {0, -1}, {0, 1}});
  ChainDraws b;
  b.draws = psmc::testing::rows_of({{1, 2}, {3, 2}, {2, 1}, {2, 3}});
  const auto sub = summarize_chains({a, b});
  const CombinedSample out = combine_ar(sub);
  EXPECT_EQ(out.center, vec({1.0, 1.0}));
  for (Eigen::Index t = 0; t < 4; ++t) {
    EXPECT_EQ(out.draws.row(t), a.draws.row(t) + Eigen::RowVector2d(1, 1));
    EXPECT_EQ(out.draws.row(4 + t), b.draws.row(t) - Eigen::RowVector2d(1, 1));
  }
  EXPECT_EQ(out.chain_offsets, (std::vector<Eigen::Index>{0, 4}));
}

TEST(CombineAr, GrandMeanIsTheCommonCenter) {
  const auto sub = random_sub(7, 4, 3000, 2);
  const CombinedSample out = combine_ar(sub);
  Eigen::Index rows = 0;
  for (const auto& c : sub.chains) rows += c.size();
  EXPECT_EQ(out.draws.rows(), rows);
  // equal-length chains are not required: each shifted chain has mean center
  for (std::size_t i = 0; i < sub.chains.size(); ++i) {
    const Vector m =
        out.draws.middleRows(out.chain_offsets[i], sub.chains[i].size()).colwise().mean();
    EXPECT_LT((m - out.center).cwiseAbs().maxCoeff(), 1e-10);
  }
  const Vector grand = out.draws.colwise().mean();
  EXPECT_LT((grand - common_center(sub)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CombineAr, ShiftIsRigid) {
  const auto sub = random_sub(5, 3, 2000, 3);
  const CombinedSample out = combine_ar(sub);
  for (std::size_t i = 0; i < sub.chains.size(); ++i) {
    ChainDraws shifted;
    shifted.draws = out.draws.middleRows(out.chain_offsets[i], sub.chains[i].size());
    EXPECT_LT((shifted.covariance() - sub.chains[i].covariance()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Recenter, RefinedCenterOnlyMovesTheShift) {
  const auto sub = random_sub(3, 2, 100, 4);
  const Vector c = vec({10.0, -10.0});
  const CombinedSample out = recenter(sub, c, CombineMethod::ARNR);
  EXPECT_EQ(out.method, CombineMethod::ARNR);
  EXPECT_LT((out.draws.colwise().mean().transpose() - c).norm(), 1e-10);
  EXPECT_THROW(recenter(sub, vec({1.0}), CombineMethod::ARNR), DimensionMismatch);
}

TEST(CombineCmc, SingleChainIsUnchanged) {
  const auto sub = random_sub(1, 3, 500, 5);
  const CombinedSample out = combine_cmc(sub);
  EXPECT_LT((out.draws - sub.chains[0].draws).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CombineCmc, IdenticalShardsGiveTheCommonDraws) {
  const auto base = random_sub(1, 2, 400, 6);
  const auto sub = summarize_chains({base.chains[0], base.chains[0], base.chains[0]});
  const CombinedSample out = combine_cmc(sub);
  EXPECT_LT((out.draws - base.chains[0].draws).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(out.warnings.empty());
}

TEST(CombineCmc, PrecisionWeightedAverageOfEachDraw) {
  const auto sub = random_sub(3, 2, 300, 7);
  const CombinedSample out = combine_cmc(sub);
  EXPECT_EQ(out.draws.rows(), 300);
  ASSERT_FALSE(out.warnings.empty());
  Matrix wsum = Matrix::Zero(2, 2);
  std::vector<Matrix> w;
  for (const auto& c : sub.shard_covs) {
    w.push_back(c.inverse());
    wsum += w.back();
  }
  for (Eigen::Index t : {0, 150, 299}) {
    Vector acc = Vector::Zero(2);
    for (std::size_t i = 0; i < 3; ++i) acc += w[i] * sub.chains[i].draws.row(t).transpose();
    const Vector expected = wsum.inverse() * acc;
    EXPECT_LT((out.draws.row(t).transpose() - expected).norm(), 1e-10);
  }
}

TEST(CombineCmc, SingularCovarianceFallsBackToIdentity) {
  ChainDraws flat;
  flat.draws = Matrix::Ones(50, 2);
  const auto good = random_sub(1, 2, 50, 8);
  const auto sub = summarize_chains({flat, good.chains[0]});
  const CombinedSample out = combine_cmc(sub);
  ASSERT_FALSE(out.warnings.empty());
  EXPECT_NE(out.warnings[0].find("identity"), std::string::npos);
  EXPECT_LT((out.draws.row(3) - 0.5 * (flat.draws.row(3) + good.chains[0].draws.row(3))).norm(),
            1e-12);
}

TEST(Newton, QuadraticConvergesInOneStep) {
  // Gaussian log posterior in (mu, log sigma) with log sigma held fixed: quadratic in mu
  const Dataset data = generate(default_spec(ExampleId::Gaussian, 400, 3));
  GaussianModel g;
  const double log_sigma = 1.0;
  GradHessFn fn = [&](const Vector& mu) {
    const GradHess full = g.weighted_grad_hess(vec({mu[0], log_sigma}), data.rows, {1.0, 1.0});
    return GradHess{full.gradient.head(1), full.hessian.topLeftCorner(1, 1)};
  };
  const NewtonResult r = newton_maximize(fn, vec({25.0}), 5, 1e-9);
  EXPECT_EQ(r.status, NewtonStatus::Converged);
  ASSERT_EQ(r.trace.iterates.size(), 2u);
  EXPECT_NEAR(r.center[0], data.rows.col(0).mean(), 1e-10);
}

TEST(Newton, LogisticRefinementReachesTightGradient) {
  const Dataset data = generate(default_spec(ExampleId::Logistic, 20000, 9));
  LogisticModel model(5);
  const auto shards = make_shards(data, 20, 2);
  RwmConfig cfg;
  cfg.total_iters = 6000;
  cfg.burn_in = 2000;
  const auto sub = run_subposteriors(rwm_chain(model, cfg, SubposteriorKind::Rescaled), shards,
                                     {3, 1});
  const NewtonResult r = refine_center_newton(model, shards, common_center(sub), 5, 1e-12);
  EXPECT_EQ(r.trace.iterates.size(), r.trace.gradient_norms.size());
  EXPECT_LT(r.trace.gradient_norms.back(), 1e-6);
  const Vector g = model.sum_grad_log_lik(r.center, data.rows) + model.grad_log_prior(r.center);
  EXPECT_LT(g.norm(), 1e-6);
  // superlinear once inside the unit ball
  for (std::size_t k = 0; k + 1 < r.trace.gradient_norms.size(); ++k) {
    const double gk = r.trace.gradient_norms[k];
    if (gk < 1.0 && gk > 1e-10) {
      EXPECT_LE(r.trace.gradient_norms[k + 1], 10.0 * std::pow(gk, 1.5)) << "step " << k;
    }
  }
}

TEST(Newton, ShardedAndWholeDataRefinementAgree) {
  const Dataset data = generate(default_spec(ExampleId::Logistic, 4000, 10));
  LogisticModel model(5);
  const Vector init = vec({0.0, 4.0, -6.0, 2.0, -18.0});
  const NewtonResult whole = refine_center_newton(model, data, init, 8, 1e-10);
  const NewtonResult sharded =
      refine_center_newton(model, make_shards(data, 8, 1), init, 8, 1e-10, 0);
  EXPECT_LT((whole.center - sharded.center).norm(), 1e-8);
  const NewtonResult seq = refine_center_newton(model, make_shards(data, 8, 1), init, 8, 1e-10, 1);
  EXPECT_TRUE(seq.center == sharded.center);
}

TEST(Newton, SingularHessianFallsBackToInit) {
  GradHessFn flat = [](const Vector& x) {
    return GradHess{Vector::Ones(x.size()), Matrix::Zero(x.size(), x.size())};
  };
  const NewtonResult r = newton_maximize(flat, vec({1.0, 2.0}), 5, 1e-8);
  EXPECT_EQ(r.status, NewtonStatus::SingularHessian);
  EXPECT_TRUE(r.failed());
  EXPECT_EQ(r.center, vec({1.0, 2.0}));
}

TEST(Newton, NonFiniteGradientIsReported) {
  GradHessFn bad = [](const Vector& x) {
    return GradHess{Vector::Constant(x.size(), NAN), Matrix::Identity(x.size(), x.size())};
  };
  const NewtonResult r = newton_maximize(bad, vec({1.0}), 5, 1e-8);
  EXPECT_EQ(r.status, NewtonStatus::NonFiniteStep);
  EXPECT_EQ(r.center, vec({1.0}));
}

TEST(Newton, ModelsWithoutHessianAreAConfigurationError) {
  MixtureModel m;
  const Dataset data = generate(default_spec(ExampleId::Mixture, 100, 1));
  EXPECT_THROW(refine_center_newton(m, data, m.default_init(), 5, 1e-8), ConfigurationError);
}

TEST(GaussianKl, ClosedForms) {
  const Matrix I = Matrix::Identity(2, 2);
  EXPECT_EQ(gaussian_kl(vec({1.0, 2.0}), vec({1.0, 2.0}), I), 0.0);
  EXPECT_NEAR(gaussian_kl(vec({1.0, 0.0}), vec({0.0, 0.0}), I), 0.5, 1e-12);
}

TEST(GaussianKl, MatchesGeneralFormulaWithEqualCovariances) {
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix a(3, 3);
    for (auto& v : a.reshaped()) v = n(rng);
    const Matrix S = a * a.transpose() + 0.5 * Matrix::Identity(3, 3);
    Vector m1(3);
    Vector m2(3);
    for (auto& v : m1) v = n(rng);
    for (auto& v : m2) v = n(rng);
    EXPECT_NEAR(gaussian_kl(m1, m2, S), general_kl(m1, S, m2, S), 1e-12);
    EXPECT_EQ(gaussian_kl(m1, m2, S), gaussian_kl(m2, m1, S));
  }
}

TEST(GaussianKl, RejectsIndefiniteCovariance) {
  Matrix S(2, 2);
  S << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(gaussian_kl(vec({0.0, 0.0}), vec({1.0, 0.0}), S), NotPositiveDefinite);
}

TEST(TvBound, ClosedForms) {
  EXPECT_EQ(tv_bound_from_kl(0.0), 0.0);
  EXPECT_NEAR(tv_bound_from_kl(0.25), 1.0, 1e-12);
  EXPECT_THROW(tv_bound_from_kl(-1e-3), NegativeKL);
  EXPECT_THROW(tv_bound_from_kl(NAN), NegativeKL);
}

TEST(TvBound, DominatesGridTotalVariationForBetaBernoulli) {
  // AR output against the exact posterior, both summarised by Gaussians with a shared variance
  const Dataset data = generate(default_spec(ExampleId::Bernoulli, 100000, 31));
  const int K = 50;
  const auto shards = make_shards(data, K, 1);
  BernoulliModel model;
  const auto sub = run_subposteriors(beta_chain(model, 20000, SubposteriorKind::Rescaled), shards,
                                     {1, 1});
  const CombinedSample ar = combine_ar(sub);
  const BetaPosterior exact = beta_bernoulli_exact(make_shards(data, 1, 1)[0], 1);
  const double var = exact.variance();
  const Vector m_ar = ar.draws.colwise().mean();
  const double kl = gaussian_kl(m_ar, vec({exact.mean()}), Matrix::Constant(1, 1, var));
  const double bound = tv_bound_from_kl(kl);
  // numeric TV between the KDE of the AR draws and the exact Beta density
  const DensityEstimate est = kde_1d(std::span<const double>(ar.draws.data(), ar.draws.rows()));
  std::vector<double> diff(est.grid.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const double x = est.grid[i];
    const double p = x > 0.0 && x < 1.0
                         ? std::exp(dist::beta_log_pdf(x, exact.a, exact.b))
                         : 0.0;
    diff[i] = std::abs(est.values[i] - p);
  }
  const double tv = 0.5 * trapezoid(est.grid, diff);
  // the bound concerns the location error; KDE smoothing adds its own TV on top
  EXPECT_GE(bound + 0.05, tv);
  EXPECT_LT(bound, 1.0);
}
