#pragma once

#include <vector>

#include "psmc/distributions.hpp"
#include "psmc/model_core.hpp"

namespace psmc {

/// X ~ N(mu, sigma^2) sampled in (mu, log sigma) with the flat prior p(mu, log sigma) = 1.
/// Rows: one column, x. Reported coordinates are (mu, sigma^2).
class GaussianModel final : public ModelSpec {
 public:
  std::string name() const override { return "gaussian"; }
  int dim() const override { return 2; }
  std::vector<std::string> component_names() const override { return {"mu", "log_sigma"}; }
  int row_width() const override { return 1; }

  double log_lik(const Vector& theta, Row row) const override;
  Vector grad_log_lik(const Vector& theta, Row row) const override;
  bool has_hessian() const override { return true; }
  Matrix hess_log_lik(const Vector& theta, Row row) const override;

  double log_prior(const Vector& theta) const override;
  Vector grad_log_prior(const Vector& theta) const override;
  Matrix hess_log_prior(const Vector& theta) const override;

  /// diag(1 / sigma^2, 2) in (mu, log sigma).
  std::optional<Matrix> fisher_information(const Vector& theta) const override;

  Vector to_reported(const Vector& theta) const override;
  std::vector<std::string> reported_names() const override { return {"mu", "sigma2"}; }

  /// Sufficient-statistic target: O(1) per evaluation.
  LogTarget bind(std::shared_ptr<const RowMatrix> rows, TargetWeights weights) const override;
};

/// P(y = 1 | x, theta) = 1 / (1 + exp(-x'theta)) with a flat prior.
/// Rows: p feature columns followed by the label y in {0, 1}.
class LogisticModel final : public ModelSpec {
 public:
  explicit LogisticModel(int features);

  std::string name() const override { return "logistic"; }
  int dim() const override { return features_; }
  std::vector<std::string> component_names() const override;
  int row_width() const override { return features_ + 1; }

  double log_lik(const Vector& theta, Row row) const override;
  Vector grad_log_lik(const Vector& theta, Row row) const override;
  bool has_hessian() const override { return true; }
  Matrix hess_log_lik(const Vector& theta, Row row) const override;

  double log_prior(const Vector& theta) const override;
  Vector grad_log_prior(const Vector& theta) const override;
  Matrix hess_log_prior(const Vector& theta) const override;

  double sum_log_lik(const Vector& theta, const RowMatrix& rows) const override;
  Vector sum_grad_log_lik(const Vector& theta, const RowMatrix& rows) const override;
  Matrix sum_hess_log_lik(const Vector& theta, const RowMatrix& rows) const override;

 private:
  int features_;
};

/// log sigmoid(eta) without overflow for any finite eta.
double log_sigmoid(double eta);

/// Bernoulli(p) observations with a Beta(a0, b0) prior on p. Rows: one column in {0, 1}.
class BernoulliModel final : public ModelSpec {
 public:
  explicit BernoulliModel(double a0 = 0.01, double b0 = 0.01);

  std::string name() const override { return "bernoulli"; }
  int dim() const override { return 1; }
  std::vector<std::string> component_names() const override { return {"p"}; }
  int row_width() const override { return 1; }
  bool in_support(const Vector& theta) const override;

  double log_lik(const Vector& theta, Row row) const override;
  Vector grad_log_lik(const Vector& theta, Row row) const override;
  bool has_hessian() const override { return true; }
  Matrix hess_log_lik(const Vector& theta, Row row) const override;

  double log_prior(const Vector& theta) const override;
  Vector grad_log_prior(const Vector& theta) const override;
  Matrix hess_log_prior(const Vector& theta) const override;

  /// 1 / (p (1 - p)).
  std::optional<Matrix> fisher_information(const Vector& theta) const override;
  Vector default_init() const override;

  LogTarget bind(std::shared_ptr<const RowMatrix> rows, TargetWeights weights) const override;

  double a0() const { return a0_; }
  double b0() const { return b0_; }

 private:
  double a0_;
  double b0_;
};

using BetaPosterior = dist::Beta;

/// Conjugate posterior of a Bernoulli shard under likelihood/prior exponents:
/// Beta(w_p (a0 - 1) + 1 + w_l s, w_p (b0 - 1) + 1 + w_l (M - s)).
BetaPosterior beta_bernoulli_posterior(const DataShard& shard, TargetWeights weights, double a0,
                                       double b0);

/// Exact rescaled subposterior Beta(a0 + K s, b0 + K (M - s)).
BetaPosterior beta_bernoulli_exact(const DataShard& shard, int replication, double a0 = 0.01,
                                   double b0 = 0.01);

// ---------------------------------------------------------------------------
// Two-component regression mixture
//   y | x ~ (1 - p) N(alpha x1 + beta x2, sigma2) + p N(0, psi2)
// Rows: x1, x2, y.

struct MixtureHyperParams {
  double m_alpha = 0.0;
  double sigma2_alpha = 100.0;
  double m_beta = 0.0;
  double sigma2_beta = 100.0;
  double alpha_sigma = 1.0;
  double beta_sigma = 1.0;
  double alpha_psi = 1.0;
  double beta_psi = 1.0;
  double lambda = 1.0;
  double eta = 1.0;

  void validate() const;
  /// Hyperparameters of prior^power, which stays in the conjugate family.
  MixtureHyperParams tempered(double power) const;
};

struct MixtureParams {
  double alpha = 0.0;
  double beta = 0.0;
  double sigma2 = 1.0;
  double psi2 = 1.0;
  double p = 0.5;

  Vector to_vector() const;
  static MixtureParams from_vector(const Vector& v);
};

struct MixtureModelState {
  MixtureParams theta;
  /// Noise-label counts, one per row, each in [0, replication].
  std::vector<int> z;

  void validate(int replication) const;
};

/// Weighted moments of a shard given latent counts; w_j = K - z_j.
struct MixtureSuffStats {
  double sw = 0.0;
  double swx11 = 0.0;
  double swx22 = 0.0;
  double swx12 = 0.0;
  double swx1y = 0.0;
  double swx2y = 0.0;
  double swyy = 0.0;
  double sz = 0.0;
  double szyy = 0.0;

  void add(double x1, double x2, double y, int z, int replication) {
    const double w = static_cast<double>(replication - z);
    const double zd = static_cast<double>(z);
    sw += w;
    swx11 += w * x1 * x1;
    swx22 += w * x2 * x2;
    swx12 += w * x1 * x2;
    swx1y += w * x1 * y;
    swx2y += w * x2 * y;
    swyy += w * y * y;
    sz += zd;
    szyy += zd * y * y;
  }
};

MixtureSuffStats mixture_suff_stats(const RowMatrix& rows, const std::vector<int>& z,
                                    int replication);

/// Probability that a row belongs to the N(0, psi2) component.
double mixture_noise_prob(const MixtureParams& theta, double x1, double x2, double y);

dist::Normal alpha_conditional(const MixtureParams& theta, const MixtureSuffStats& s,
                               const MixtureHyperParams& hyper);
dist::Normal beta_conditional(const MixtureParams& theta, const MixtureSuffStats& s,
                              const MixtureHyperParams& hyper);
dist::InverseGamma sigma2_conditional(const MixtureParams& theta, const MixtureSuffStats& s,
                                      const MixtureHyperParams& hyper);
dist::InverseGamma psi2_conditional(const MixtureSuffStats& s, const MixtureHyperParams& hyper);
dist::Beta p_conditional(const MixtureSuffStats& s, const MixtureHyperParams& hyper);

struct FullConditionals {
  int trials = 1;
  /// z_j ~ Binomial(trials, noise_prob[j]).
  std::vector<double> noise_prob;
  dist::Normal alpha{};
  dist::Normal beta{};
  dist::InverseGamma sigma2{};
  dist::InverseGamma psi2{};
  dist::Beta p{};
  /// Every row assigned to noise: alpha/beta/sigma2 conditionals equal their priors.
  bool degenerate = false;
};

/// All full conditionals at the given state, using rescaled-shard counts
/// (K = shard.replication; K = 1 gives the full-data conditionals).
FullConditionals mixture_gibbs_conditionals(const MixtureModelState& state, const DataShard& shard,
                                            const MixtureHyperParams& hyper);

/// Marginal (latent-free) mixture likelihood in (alpha, beta, sigma2, psi2, p). No Hessian.
class MixtureModel final : public ModelSpec {
 public:
  explicit MixtureModel(MixtureHyperParams hyper = {});

  std::string name() const override { return "mixture"; }
  int dim() const override { return 5; }
  std::vector<std::string> component_names() const override {
    return {"alpha", "beta", "sigma2", "psi2", "p"};
  }
  int row_width() const override { return 3; }
  bool in_support(const Vector& theta) const override;

  double log_lik(const Vector& theta, Row row) const override;
  Vector grad_log_lik(const Vector& theta, Row row) const override;
  double log_prior(const Vector& theta) const override;
  Vector grad_log_prior(const Vector& theta) const override;
  Vector default_init() const override;

  const MixtureHyperParams& hyper() const { return hyper_; }

 private:
  MixtureHyperParams hyper_;
};

}  // namespace psmc
