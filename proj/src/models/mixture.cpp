#include <cmath>
#include <limits>

#include "psmc/models.hpp"

namespace psmc {

void MixtureHyperParams::validate() const {
  const double positive[] = {sigma2_alpha, sigma2_beta, alpha_sigma, beta_sigma,
                             alpha_psi,    beta_psi,    lambda,      eta};
  for (double v : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigurationError("mixture variance/shape/rate hyperparameters must be positive");
    }
  }
  if (!std::isfinite(m_alpha) || !std::isfinite(m_beta)) {
    throw ConfigurationError("mixture prior means must be finite");
  }
}

MixtureHyperParams MixtureHyperParams::tempered(double power) const {
  if (!(power > 0.0)) throw ConfigurationError("prior power must be positive");
  if (power == 1.0) return *this;
  MixtureHyperParams t = *this;
  t.sigma2_alpha = sigma2_alpha / power;
  t.sigma2_beta = sigma2_beta / power;
  // IG(a, b)^v = IG(v (a + 1) - 1, v b); Beta(l, e)^v = Beta(v (l - 1) + 1, v (e - 1) + 1)
  t.alpha_sigma = power * (alpha_sigma + 1.0) - 1.0;
  t.beta_sigma = power * beta_sigma;
  t.alpha_psi = power * (alpha_psi + 1.0) - 1.0;
  t.beta_psi = power * beta_psi;
  t.lambda = power * (lambda - 1.0) + 1.0;
  t.eta = power * (eta - 1.0) + 1.0;
  return t;
}

Vector MixtureParams::to_vector() const {
  Vector v(5);
  v << alpha, beta, sigma2, psi2, p;
  return v;
}

MixtureParams MixtureParams::from_vector(const Vector& v) {
  if (v.size() != 5) throw DimensionMismatch("mixture parameters have dimension 5");
  return {v[0], v[1], v[2], v[3], v[4]};
}

void MixtureModelState::validate(int replication) const {
  if (!(theta.sigma2 > 0.0) || !(theta.psi2 > 0.0)) {
    throw PreconditionError("mixture state: variances must be positive");
  }
  if (!(theta.p > 0.0 && theta.p < 1.0)) {
    throw PreconditionError("mixture state: p must lie in (0, 1)");
  }
  for (int zj : z) {
    if (zj < 0 || zj > replication) throw PreconditionError("mixture state: z out of [0, K]");
  }
}

MixtureSuffStats mixture_suff_stats(const RowMatrix& rows, const std::vector<int>& z,
                                    int replication) {
  if (static_cast<Eigen::Index>(z.size()) != rows.rows()) {
    throw DimensionMismatch("latent count vector length != row count");
  }
  MixtureSuffStats s;
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    s.add(rows(j, 0), rows(j, 1), rows(j, 2), z[static_cast<std::size_t>(j)], replication);
  }
  return s;
}

double mixture_noise_prob(const MixtureParams& theta, double x1, double x2, double y) {
  const double signal = std::log1p(-theta.p) +
                        dist::normal_log_pdf(y, theta.alpha * x1 + theta.beta * x2, theta.sigma2);
  const double noise = std::log(theta.p) + dist::normal_log_pdf(y, 0.0, theta.psi2);
  // p* = 1 / (1 + exp(signal - noise))
  const double diff = signal - noise;
  if (diff > 0.0) {
    const double e = std::exp(-diff);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(diff));
}

dist::Normal alpha_conditional(const MixtureParams& theta, const MixtureSuffStats& s,
                               const MixtureHyperParams& hyper) {
  const double precision = s.swx11 / theta.sigma2 + 1.0 / hyper.sigma2_alpha;
  const double num = (s.swx1y - theta.beta * s.swx12) / theta.sigma2 +
                     hyper.m_alpha / hyper.sigma2_alpha;
  return {num / precision, 1.0 / precision};
}

dist::Normal beta_conditional(const MixtureParams& theta, const MixtureSuffStats& s,
                              const MixtureHyperParams& hyper) {
  const double precision = s.swx22 / theta.sigma2 + 1.0 / hyper.sigma2_beta;
  const double num = (s.swx2y - theta.alpha * s.swx12) / theta.sigma2 +
                     hyper.m_beta / hyper.sigma2_beta;
  return {num / precision, 1.0 / precision};
}

dist::InverseGamma sigma2_conditional(const MixtureParams& theta, const MixtureSuffStats& s,
                                      const MixtureHyperParams& hyper) {
  const double a = theta.alpha;
  const double b = theta.beta;
  // sum_j w_j (a x1 + b x2 - y)^2 expanded over the weighted moments
  double rss = a * a * s.swx11 + b * b * s.swx22 + s.swyy + 2.0 * a * b * s.swx12 -
               2.0 * a * s.swx1y - 2.0 * b * s.swx2y;
  if (rss < 0.0) rss = 0.0;
  return {hyper.alpha_sigma + 0.5 * s.sw, hyper.beta_sigma + 0.5 * rss};
}

dist::InverseGamma psi2_conditional(const MixtureSuffStats& s, const MixtureHyperParams& hyper) {
  return {hyper.alpha_psi + 0.5 * s.sz, hyper.beta_psi + 0.5 * s.szyy};
}

dist::Beta p_conditional(const MixtureSuffStats& s, const MixtureHyperParams& hyper) {
  return {hyper.lambda + s.sz, hyper.eta + s.sw};
}

FullConditionals mixture_gibbs_conditionals(const MixtureModelState& state, const DataShard& shard,
                                            const MixtureHyperParams& hyper) {
  const int K = shard.replication;
  if (K < 1) throw PreconditionError("mixture conditionals: replication < 1");
  if (shard.m() < 1) throw PreconditionError("mixture conditionals: empty shard");
  state.validate(K);
  hyper.validate();
  const RowMatrix& rows = shard.data();
  if (rows.cols() != 3) throw DimensionMismatch("mixture rows must be (x1, x2, y)");

  FullConditionals out;
  out.trials = K;
  out.noise_prob.resize(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    out.noise_prob[static_cast<std::size_t>(j)] =
        mixture_noise_prob(state.theta, rows(j, 0), rows(j, 1), rows(j, 2));
  }
  const MixtureSuffStats s = mixture_suff_stats(rows, state.z, K);
  out.alpha = alpha_conditional(state.theta, s, hyper);
  out.beta = beta_conditional(state.theta, s, hyper);
  out.sigma2 = sigma2_conditional(state.theta, s, hyper);
  out.psi2 = psi2_conditional(s, hyper);
  out.p = p_conditional(s, hyper);
  out.degenerate = s.sw == 0.0;
  return out;
}

MixtureModel::MixtureModel(MixtureHyperParams hyper) : hyper_(hyper) { hyper_.validate(); }

bool MixtureModel::in_support(const Vector& theta) const {
  return theta[2] > 0.0 && theta[3] > 0.0 && theta[4] > 0.0 && theta[4] < 1.0;
}

double MixtureModel::log_lik(const Vector& theta, Row row) const {
  const double mu = theta[0] * row[0] + theta[1] * row[1];
  const double signal = std::log1p(-theta[4]) + dist::normal_log_pdf(row[2], mu, theta[2]);
  const double noise = std::log(theta[4]) + dist::normal_log_pdf(row[2], 0.0, theta[3]);
  const double hi = std::max(signal, noise);
  return hi + std::log1p(std::exp(std::min(signal, noise) - hi));
}

Vector MixtureModel::grad_log_lik(const Vector& theta, Row row) const {
  const MixtureParams t = MixtureParams::from_vector(theta);
  const double r = mixture_noise_prob(t, row[0], row[1], row[2]);
  const double resid = row[2] - (t.alpha * row[0] + t.beta * row[1]);
  Vector g(5);
  g[0] = (1.0 - r) * resid * row[0] / t.sigma2;
  g[1] = (1.0 - r) * resid * row[1] / t.sigma2;
  g[2] = (1.0 - r) * (-0.5 / t.sigma2 + 0.5 * resid * resid / (t.sigma2 * t.sigma2));
  g[3] = r * (-0.5 / t.psi2 + 0.5 * row[2] * row[2] / (t.psi2 * t.psi2));
  g[4] = r / t.p - (1.0 - r) / (1.0 - t.p);
  return g;
}

double MixtureModel::log_prior(const Vector& theta) const {
  if (!in_support(theta)) return -std::numeric_limits<double>::infinity();
  return dist::normal_log_pdf(theta[0], hyper_.m_alpha, hyper_.sigma2_alpha) +
         dist::normal_log_pdf(theta[1], hyper_.m_beta, hyper_.sigma2_beta) +
         dist::inverse_gamma_log_pdf(theta[2], hyper_.alpha_sigma, hyper_.beta_sigma) +
         dist::inverse_gamma_log_pdf(theta[3], hyper_.alpha_psi, hyper_.beta_psi) +
         dist::beta_log_pdf(theta[4], hyper_.lambda, hyper_.eta);
}

Vector MixtureModel::grad_log_prior(const Vector& theta) const {
  Vector g(5);
  g[0] = -(theta[0] - hyper_.m_alpha) / hyper_.sigma2_alpha;
  g[1] = -(theta[1] - hyper_.m_beta) / hyper_.sigma2_beta;
  g[2] = -(hyper_.alpha_sigma + 1.0) / theta[2] + hyper_.beta_sigma / (theta[2] * theta[2]);
  g[3] = -(hyper_.alpha_psi + 1.0) / theta[3] + hyper_.beta_psi / (theta[3] * theta[3]);
  g[4] = (hyper_.lambda - 1.0) / theta[4] - (hyper_.eta - 1.0) / (1.0 - theta[4]);
  return g;
}

Vector MixtureModel::default_init() const {
  Vector v(5);
  v << 0.0, 0.0, 1.0, 1.0, 0.5;
  return v;
}

}  // namespace psmc
