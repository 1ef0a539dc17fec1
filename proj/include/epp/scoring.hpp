#pragma once

#include <span>
#include <vector>

namespace epp {

// Predictive distributions below this sigma are clamped up to the floor inside
// the scoring kernels so optimizers can wander through tiny/negative spread
// without blowing up; user-facing construction still rejects sigma <= 0.
inline constexpr double kSigmaFloor = 1e-3;

struct GaussianForecast {
  double mu = 0.0;
  double sigma = 1.0;
};

// Throws NonPositiveSigmaError on sigma <= 0, clamps to the floor otherwise.
GaussianForecast make_gaussian(double mu, double sigma);

struct QuantileForecast {
  std::vector<double> levels;  // strictly increasing, in (0,1)
  std::vector<double> values;  // non-decreasing, same length
};

// Standard normal density / CDF / quantile. cdf is erfc-based (abs error well
// below 1e-12); quantile is the rational approximation refined by one Halley
// step, good to ~1e-15 on (0,1).
double normal_pdf(double z);
double normal_cdf(double z);
double normal_quantile(double p);

// Closed-form CRPS of a Gaussian forecast:
//   sigma * ( z*(2*Phi(z)-1) + 2*phi(z) - 1/sqrt(pi) ),   z = (y-mu)/sigma.
// sigma <= 0 throws NonPositiveSigmaError; 0 < sigma < floor scores at the floor.
double crps_normal(double mu, double sigma, double y);
inline double crps_normal(const GaussianForecast& f, double y) {
  return crps_normal(f.mu, f.sigma, y);
}

struct GaussianGrad {
  double d_mu = 0.0;
  double d_sigma = 0.0;
};

// Analytic derivatives of crps_normal:
//   d/dmu    = -(2*Phi(z) - 1)
//   d/dsigma = 2*phi(z) - 1/sqrt(pi)
// Evaluated at the clamped sigma when below the floor.
GaussianGrad crps_normal_grad(double mu, double sigma, double y);

// Ignorance / logarithmic score: -log N(y | mu, sigma^2).
double log_score_normal(double mu, double sigma, double y);

// Derivatives of the log score w.r.t. mu and log(sigma):
//   d/dmu        = -(y-mu)/sigma^2
//   d/dlog sigma = 1 - ((y-mu)/sigma)^2
GaussianGrad log_score_normal_grad_mu_logsigma(double mu, double sigma, double y);

// Sample CRPS of a finite ensemble:
//   (1/m) sum |x_i - y| - 1/(2 m^2) sum_ij |x_i - x_j|.
// Computed via the sorted O(m log m) form; empty ensembles throw.
double crps_ensemble(std::span<const double> members, double y);

// CRPS of a quantile forecast, scored by treating the quantile values at
// equally spaced levels k/(K+1) as an m=K ensemble. Validates monotonicity.
double crps_quantile_approx(const QuantileForecast& f, double y);

// Skill score 1 - score/reference. Zero reference throws ZeroReferenceError.
double crpss(double score, double reference_score);

}  // namespace epp
