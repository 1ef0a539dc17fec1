#pragma once

#include <string>
#include <vector>

#include "epp/data.hpp"
#include "epp/scoring.hpp"

namespace epp {

// Affine links from the t2m ensemble summaries to a Gaussian forecast:
//   mu = a + b * ens_mean,  sigma = max(c + d * ens_sd, sigma floor).
struct EmosCoefficients {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
  double d = 1.0;
  bool converged = true;
  int iterations = 0;
};

enum class EmosScope { global, local };

struct EmosModel {
  EmosScope scope = EmosScope::global;
  EmosCoefficients global;                   // fitted pool; local fallback
  std::vector<EmosCoefficients> per_station; // empty for global scope
  std::vector<bool> used_fallback;           // per station, local scope only
  std::vector<std::string> warnings;
  int mean_index = -1;  // predictor columns consumed at prediction time
  int sd_index = -1;
};

// Minimum-CRPS fit. Global pools every sample (needs >= 50); local fits each
// station separately (needs >= 30 per station, otherwise that station reuses
// the global coefficients and a warning is recorded).
EmosModel fit_emos(const ForecastDataset& train, EmosScope scope);

GaussianForecast predict_emos(const EmosCoefficients& k, double x_mean, double x_sd);
GaussianForecast predict_emos(const EmosModel& model, std::size_t station_index,
                              double x_mean, double x_sd);
GaussianForecast predict_emos(const EmosModel& model, const Sample& sample);

// Exposed for reuse/testing: fit one coefficient set on (mean, sd, obs) triples.
EmosCoefficients fit_emos_pool(const std::vector<double>& x_mean,
                               const std::vector<double>& x_sd,
                               const std::vector<double>& obs);

constexpr int kEmosMinGlobalSamples = 50;
constexpr int kEmosMinLocalSamples = 30;

}  // namespace epp
