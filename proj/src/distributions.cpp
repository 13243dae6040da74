#include "psmc/distributions.hpp"

#include <cmath>
#include <limits>

#include "psmc/errors.hpp"

namespace psmc::dist {

double normal_log_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return -kLogSqrt2Pi - 0.5 * std::log(var) - 0.5 * z * z / var;
}

double beta_log_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return log_norm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
}

double inverse_gamma_log_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double sample_normal(Rng& rng, Normal d) {
  std::normal_distribution<double> n(0.0, 1.0);
  return d.mean + std::sqrt(d.var) * n(rng);
}

double sample_log_gamma(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw NumericalError("gamma shape must be positive");
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
  }
  // Gamma(a) = Gamma(a + 1) * U^{1/a}
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double uv = u(rng);
  while (uv <= 0.0) uv = u(rng);
  return std::log(g(rng)) + std::log(uv) / shape;
}

double sample_beta(Rng& rng, Beta d) {
  const double lx = sample_log_gamma(rng, d.a);
  const double ly = sample_log_gamma(rng, d.b);
  // x / (x + y) evaluated in log space
  return 1.0 / (1.0 + std::exp(ly - lx));
}

double sample_inverse_gamma(Rng& rng, InverseGamma d) {
  if (!(d.rate > 0.0)) throw NumericalError("inverse-gamma rate must be positive");
  return d.rate * std::exp(-sample_log_gamma(rng, d.shape));
}

int sample_binomial(Rng& rng, int trials, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (trials == 1) return u(rng) < p ? 1 : 0;
  if (trials <= 64) {
    // CDF inversion; most draws stop at k = 0 when p is small
    const double ratio = p / (1.0 - p);
    double prob = std::exp(trials * std::log1p(-p));
    double cdf = prob;
    const double v = u(rng);
    int k = 0;
    while (v > cdf && k < trials) {
      prob *= ratio * static_cast<double>(trials - k) / static_cast<double>(k + 1);
      ++k;
      cdf += prob;
    }
    return k;
  }
  std::binomial_distribution<int> b(trials, p);
  return b(rng);
}

}  // namespace psmc::dist
