#include "epp/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "epp/errors.hpp"

namespace epp {

namespace {

constexpr double kInvSqrtPi = 0.5641895835477562869480794515608;   // 1/sqrt(pi)
constexpr double kInvSqrt2 = 0.7071067811865475244008443621048;    // 1/sqrt(2)
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599344;  // 1/sqrt(2*pi)
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056;  // log(sqrt(2*pi))

double clamped_sigma(double sigma) {
  if (!(sigma > 0.0)) throw NonPositiveSigmaError();
  return std::max(sigma, kSigmaFloor);
}

}  // namespace

GaussianForecast make_gaussian(double mu, double sigma) {
  return GaussianForecast{mu, clamped_sigma(sigma)};
}

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw NumericError("normal_quantile requires p in (0,1)");
  }
  // Peter Acklam's rational approximation, then one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e / normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double crps_normal(double mu, double sigma, double y) {
  const double s = clamped_sigma(sigma);
  const double z = (y - mu) / s;
  return s * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - kInvSqrtPi);
}

GaussianGrad crps_normal_grad(double mu, double sigma, double y) {
  const double s = clamped_sigma(sigma);
  const double z = (y - mu) / s;
  GaussianGrad g;
  g.d_mu = -(2.0 * normal_cdf(z) - 1.0);
  g.d_sigma = 2.0 * normal_pdf(z) - kInvSqrtPi;
  return g;
}

double log_score_normal(double mu, double sigma, double y) {
  const double s = clamped_sigma(sigma);
  const double z = (y - mu) / s;
  return kLogSqrt2Pi + std::log(s) + 0.5 * z * z;
}

GaussianGrad log_score_normal_grad_mu_logsigma(double mu, double sigma, double y) {
  const double s = clamped_sigma(sigma);
  const double z = (y - mu) / s;
  GaussianGrad g;
  g.d_mu = -z / s;
  g.d_sigma = 1.0 - z * z;  // derivative w.r.t. log(sigma)
  return g;
}

double crps_ensemble(std::span<const double> members, double y) {
  const std::size_t m = members.size();
  if (m == 0) throw EmptyEnsembleError();
  std::vector<double> x(members.begin(), members.end());
  std::sort(x.begin(), x.end());
  double abs_term = 0.0;
  double pair_term = 0.0;  // sum_{i<j} (x_j - x_i), via sorted ranks
  for (std::size_t i = 0; i < m; ++i) {
    abs_term += std::abs(x[i] - y);
    pair_term += (2.0 * static_cast<double>(i) + 1.0 - static_cast<double>(m)) * x[i];
  }
  const double dm = static_cast<double>(m);
  return abs_term / dm - pair_term / (dm * dm);
}

double crps_quantile_approx(const QuantileForecast& f, double y) {
  if (f.levels.size() != f.values.size()) {
    throw DimensionMismatchError("quantile levels and values differ in length");
  }
  if (f.levels.empty()) throw EmptyEnsembleError();
  for (std::size_t i = 0; i < f.levels.size(); ++i) {
    if (!(f.levels[i] > 0.0) || !(f.levels[i] < 1.0)) {
      throw NonMonotoneQuantilesError("levels must lie in (0,1)");
    }
    if (i > 0 && !(f.levels[i] > f.levels[i - 1])) {
      throw NonMonotoneQuantilesError("levels must be strictly increasing");
    }
    if (i > 0 && f.values[i] < f.values[i - 1]) {
      throw NonMonotoneQuantilesError("values must be non-decreasing");
    }
  }
  return crps_ensemble(f.values, y);
}

double crpss(double score, double reference_score) {
  if (reference_score == 0.0) throw ZeroReferenceError();
  return 1.0 - score / reference_score;
}

}  // namespace epp
