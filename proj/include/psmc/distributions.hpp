#pragma once

#include "psmc/types.hpp"

namespace psmc::dist {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

struct Normal {
  double mean;
  double var;
};

/// Shape/rate parameterization: density proportional to x^{-shape-1} exp(-rate/x).
struct InverseGamma {
  double shape;
  double rate;
};

struct Beta {
  double a;
  double b;

  double mean() const { return a / (a + b); }
  double variance() const { return a * b / ((a + b) * (a + b) * (a + b + 1.0)); }
};

double normal_log_pdf(double x, double mean, double var);
double beta_log_pdf(double x, double a, double b);
double inverse_gamma_log_pdf(double x, double shape, double rate);

double sample_normal(Rng& rng, Normal d);
/// Log of a Gamma(shape, 1) draw; stays finite for shapes far below 1.
double sample_log_gamma(Rng& rng, double shape);
double sample_beta(Rng& rng, Beta d);
double sample_inverse_gamma(Rng& rng, InverseGamma d);
int sample_binomial(Rng& rng, int trials, double p);

}  // namespace psmc::dist
