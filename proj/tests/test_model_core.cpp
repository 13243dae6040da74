#include <cmath>
#include <numbers>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "psmc/datagen.hpp"
#include "psmc/model_core.hpp"
#include "psmc/models.hpp"
#include "support/fixtures.hpp"
#include "support/stats.hpp"

using namespace psmc;
using psmc::testing::column_of;
using psmc::testing::rows_of;
using psmc::testing::vec;

namespace {

struct ModelCase {
  std::shared_ptr<ModelSpec> model;
  Dataset data;
  std::function<Vector(Rng&)> random_theta;
};

std::vector<ModelCase> all_models() {
  std::vector<ModelCase> cases;
  cases.push_back({std::make_shared<GaussianModel>(),
                   generate(default_spec(ExampleId::Gaussian, 120, 3)), [](Rng& rng) {
                     std::normal_distribution<double> n(0.0, 1.0);
                     return vec({n(rng), 0.5 * n(rng) + 1.0});
                   }});
  cases.push_back({std::make_shared<LogisticModel>(5),
                   generate(default_spec(ExampleId::Logistic, 120, 4)), [](Rng& rng) {
                     std::normal_distribution<double> n(0.0, 2.0);
                     Vector t(5);
                     for (auto& v : t) v = n(rng);
                     return t;
                   }});
  cases.push_back({std::make_shared<BernoulliModel>(),
                   generate(default_spec(ExampleId::Bernoulli, 120, 5)), [](Rng& rng) {
                     std::uniform_real_distribution<double> u(0.05, 0.95);
                     return vec({u(rng)});
                   }});
  cases.push_back({std::make_shared<MixtureModel>(),
                   generate(default_spec(ExampleId::Mixture, 120, 6)), [](Rng& rng) {
                     std::normal_distribution<double> n(0.0, 1.0);
                     std::uniform_real_distribution<double> u(0.05, 0.5);
                     return vec({2.0 + n(rng), 5.0 + n(rng), 0.5 + u(rng), 5.0 + 10.0 * u(rng),
                                 u(rng)});
                   }});
  return cases;
}

}  // namespace

TEST(ParameterVector, RejectsNonFiniteAndMismatchedNames) {
  EXPECT_THROW(ParameterVector(vec({1.0, NAN}), {"a", "b"}), NumericalError);
  EXPECT_THROW(ParameterVector(vec({1.0}), {"a", "b"}), DimensionMismatch);
  GaussianModel g;
  EXPECT_THROW(g.make_parameter(vec({1.0})), DimensionMismatch);
  const ParameterVector p = g.make_parameter(vec({1.0, 2.0}));
  EXPECT_EQ(p.names, (std::vector<std::string>{"mu", "log_sigma"}));
}

TEST(ShardLogLik, BernoulliUniformCoin) {
  BernoulliModel model;
  const DataShard shard = make_shard(column_of({1, 0, 1}), 1, 0);
  EXPECT_NEAR(shard_log_lik(model, shard, model.make_parameter(vec({0.5}))), 3.0 * std::log(0.5),
              1e-12);
  EXPECT_NEAR(3.0 * std::log(0.5), -2.0794, 1e-4);
}

TEST(ShardLogLik, EmptyShardIsAPreconditionViolation) {
  BernoulliModel model;
  const DataShard shard = make_shard(RowMatrix(0, 1), 1, 0);
  EXPECT_THROW(shard_log_lik(model, shard, model.make_parameter(vec({0.5}))), PreconditionError);
}

TEST(ShardLogLik, StandardNormalAtZero) {
  GaussianModel model;
  const DataShard shard = make_shard(column_of({0.0}), 1, 0);
  const double v = shard_log_lik(model, shard, model.make_parameter(vec({0.0, 0.0})));
  EXPECT_NEAR(v, -0.5 * std::log(2.0 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(v, -0.9189, 1e-4);
}

TEST(ShardLogLik, NamesFirstNonFiniteRow) {
  GaussianModel model;
  const DataShard shard = make_shard(column_of({0.0, 1.0, 2.0, INFINITY, NAN}), 1, 0);
  try {
    shard_log_lik(model, shard, model.make_parameter(vec({0.0, 0.0})));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.row(), 3);
  }
}

TEST(RescaledLogPost, KEqualOneIsTheFullPosteriorOfTheShard) {
  for (const auto& c : all_models()) {
    const DataShard shard = make_shard(c.data.rows, 1, 0);
    Rng rng(9);
    const ParameterVector theta = c.model->make_parameter(c.random_theta(rng));
    EXPECT_NEAR(rescaled_log_post(*c.model, shard, theta), full_log_post(*c.model, c.data, theta),
                1e-9 * std::abs(full_log_post(*c.model, c.data, theta)))
        << c.model->name();
  }
}

TEST(RescaledLogPost, BernoulliFlatPriorCountsEachRowKTimes) {
  BernoulliModel flat(1.0, 1.0);
  const DataShard shard = make_shard(column_of({1, 0}), 3, 0);
  EXPECT_NEAR(rescaled_log_post(flat, shard, flat.make_parameter(vec({0.5}))),
              3.0 * 2.0 * std::log(0.5), 1e-12);
}

TEST(RescaledLogPost, BetaPriorKernelIsTheRescaledConjugatePosterior) {
  // m = 7 rows with s = 2, K = 5: the normalized kernel must be Beta(0.01 + 10, 0.01 + 25)
  BernoulliModel model(0.01, 0.01);
  const int K = 5;
  const DataShard shard = make_shard(column_of({1, 0, 0, 1, 0, 0, 0}), K, 0);
  auto log_kernel = [&](double p) {
    return rescaled_log_post(model, shard, model.make_parameter(vec({p})));
  };
  const double shift = log_kernel(10.0 / 35.0);
  const double Z = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double p) { return std::exp(log_kernel(p) - shift); }, 0.0, 1.0, 15, 1e-13);
  const boost::math::beta_distribution<double> oracle(10.01, 25.01);
  for (double p : {0.05, 0.15, 0.25, 0.3, 0.45, 0.6}) {
    const double numeric = std::exp(log_kernel(p) - shift) / Z;
    EXPECT_NEAR(numeric / boost::math::pdf(oracle, p), 1.0, 1e-8) << "p = " << p;
  }
}

TEST(FullLogPost, ShardSumsEqualFullDataLikelihood) {
  for (const auto& c : all_models()) {
    for (int K : {2, 3, 5, 8}) {
      const auto shards = [&] {
        std::vector<DataShard> out;
        const Eigen::Index m = c.data.n() / K;
        for (int k = 0; k < K; ++k) out.push_back(make_shard(c.data.rows.middleRows(k * m, m), K, k));
        return out;
      }();
      Rng rng(11 + K);
      const ParameterVector theta = c.model->make_parameter(c.random_theta(rng));
      double sum = 0.0;
      for (const auto& s : shards) sum += shard_log_lik(*c.model, s, theta);
      const double full = c.model->sum_log_lik(theta.values, c.data.rows);
      EXPECT_NEAR(sum, full, 1e-9 * std::abs(full)) << c.model->name() << " K=" << K;
    }
  }
}

TEST(FullLogPost, SingleRowFlatPriorIsTheRowDensity) {
  GaussianModel g;
  const Dataset one = psmc::testing::dataset_of(column_of({1.7}));
  const Vector theta = vec({0.3, 0.2});
  const double expected = g.log_lik(theta, row_of(one.rows, 0));
  EXPECT_DOUBLE_EQ(full_log_post(g, one, g.make_parameter(theta)), expected);
  const double sigma = std::exp(0.2);
  EXPECT_NEAR(expected,
              -std::log(sigma) - 0.5 * std::log(2 * std::numbers::pi) -
                  0.5 * (1.4 / sigma) * (1.4 / sigma),
              1e-14);
}

TEST(FullLogPost, GaussianMatchesScalarLoop) {
  GeneratorSpec spec{ExampleId::Gaussian, {0.0, 10.0}, 100, 2024};
  const Dataset data = generate(spec);
  const double mu = 0.4;
  const double var = 9.0;
  double loop = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double r = data.rows(i, 0) - mu;
    loop += -0.5 * std::log(2.0 * std::numbers::pi * var) - r * r / (2.0 * var);
  }
  GaussianModel g;
  const ParameterVector theta = g.make_parameter(vec({mu, 0.5 * std::log(var)}));
  EXPECT_NEAR(full_log_post(g, data, theta), loop, 1e-10 * std::abs(loop));
}

TEST(ModelSpec, GradientsMatchCentralDifferences) {
  for (const auto& c : all_models()) {
    Rng rng(21);
    std::uniform_int_distribution<Eigen::Index> pick(0, c.data.n() - 1);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector theta = c.random_theta(rng);
      const Row row = row_of(c.data.rows, pick(rng));
      const Vector g = c.model->grad_log_lik(theta, row);
      for (Eigen::Index k = 0; k < theta.size(); ++k) {
        const double h = 1e-6 * (1.0 + std::abs(theta[k]));
        Vector up = theta;
        Vector dn = theta;
        up[k] += h;
        dn[k] -= h;
        const double fd = (c.model->log_lik(up, row) - c.model->log_lik(dn, row)) / (2.0 * h);
        EXPECT_NEAR(g[k], fd, 1e-5 * std::max(1.0, std::abs(fd)))
            << c.model->name() << " component " << k;
      }
      const Vector gp = c.model->grad_log_prior(theta);
      const Vector fdp = psmc::testing::fd_gradient(
          [&](const Vector& t) { return c.model->log_prior(t); }, theta, 1e-6);
      EXPECT_LT((gp - fdp).norm(), 1e-5 * std::max(1.0, fdp.norm())) << c.model->name();
    }
  }
}

TEST(ModelSpec, HessiansAreSymmetricAndMatchGradientDifferences) {
  for (const auto& c : all_models()) {
    if (!c.model->has_hessian()) {
      EXPECT_THROW(c.model->hess_log_lik(c.model->default_init(), row_of(c.data.rows, 0)),
                   ConfigurationError);
      continue;
    }
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector theta = c.random_theta(rng);
      const Row row = row_of(c.data.rows, trial);
      const Matrix H = c.model->hess_log_lik(theta, row);
      EXPECT_LT((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-10);
      Matrix fd(theta.size(), theta.size());
      for (Eigen::Index k = 0; k < theta.size(); ++k) {
        const double h = 1e-6 * (1.0 + std::abs(theta[k]));
        Vector up = theta;
        Vector dn = theta;
        up[k] += h;
        dn[k] -= h;
        fd.col(k) = (c.model->grad_log_lik(up, row) - c.model->grad_log_lik(dn, row)) / (2.0 * h);
      }
      EXPECT_LT((H - fd).norm(), 1e-5 * std::max(1.0, fd.norm())) << c.model->name();
    }
  }
}

TEST(ModelSpec, SpecializedBindingsAgreeWithTheGenericRowSum) {
  for (const auto& c : all_models()) {
    auto rows = std::make_shared<const RowMatrix>(c.data.rows);
    const TargetWeights w{4.0, 0.5};
    const LogTarget fast = c.model->bind(rows, w);
    const LogTarget generic = c.model->ModelSpec::bind(rows, w);
    Rng rng(41);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector theta = c.random_theta(rng);
      EXPECT_NEAR(fast(theta), generic(theta), 1e-9 * std::abs(generic(theta)))
          << c.model->name();
    }
  }
}

TEST(ModelSpec, BoundTargetIsMinusInfinityOffSupport) {
  BernoulliModel b;
  const LogTarget t = bind_shard(b, make_shard(column_of({1, 0}), 1, 0), {1.0, 1.0});
  EXPECT_EQ(t(vec({1.2})), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(t(vec({0.0})), -std::numeric_limits<double>::infinity());
  EXPECT_TRUE(std::isfinite(t(vec({0.3}))));
}

TEST(ModelSpec, WeightedGradHessScalesLikelihoodAndPriorSeparately) {
  BernoulliModel b(2.0, 3.0);
  const RowMatrix rows = column_of({1, 0, 0, 1, 1});
  const Vector theta = vec({0.4});
  const GradHess gh = b.weighted_grad_hess(theta, rows, {3.0, 0.5});
  const Vector expected = 3.0 * b.sum_grad_log_lik(theta, rows) + 0.5 * b.grad_log_prior(theta);
  EXPECT_NEAR(gh.gradient[0], expected[0], 1e-12);
  const Matrix expected_h = 3.0 * b.sum_hess_log_lik(theta, rows) + 0.5 * b.hess_log_prior(theta);
  EXPECT_NEAR(gh.hessian(0, 0), expected_h(0, 0), 1e-12);
}

TEST(Dataset, ValidateChecksShapeAndLabels) {
  Dataset d;
  EXPECT_THROW(d.validate(), PreconditionError);
  d = psmc::testing::dataset_of(rows_of({{1, 2}, {3, 4}}));
  EXPECT_NO_THROW(d.validate());
  d.columns.pop_back();
  EXPECT_THROW(d.validate(), PreconditionError);
}
