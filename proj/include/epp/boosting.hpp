#pragma once

#include <string>
#include <vector>

#include "epp/data.hpp"
#include "epp/scoring.hpp"

namespace epp {

// Gradient-boosted local distributional regression over the full predictor
// vector: mu affine in the (standardized) predictors, sigma log-affine, one
// coefficient nudged per iteration, AIC-based early stopping.
struct BoostOptions {
  int max_iter = 1000;
  double step = 0.05;
  bool aic_stopping = true;  // false: run to max_iter unconditionally
};

struct BoostCoefficients {
  std::vector<double> beta;   // length q+1, intercept first
  std::vector<double> gamma;  // same layout, acts on log sigma
  int iterations_used = 0;

  int nonzero_count() const {
    int n = 0;
    for (double v : beta) n += v != 0.0 ? 1 : 0;
    for (double v : gamma) n += v != 0.0 ? 1 : 0;
    return n;
  }
};

struct BoostModel {
  BoostOptions options;
  std::vector<std::string> feature_names;  // candidates; station descriptors excluded
  std::vector<int> feature_indices;        // positions in the full predictor vector
  std::vector<double> feature_mean;        // pooled training standardization
  std::vector<double> feature_sd;
  std::vector<BoostCoefficients> per_station;
  std::vector<std::string> warnings;
};

// Bound for the log-sigma link; keeps likelihood evaluations finite.
constexpr double kBoostLogSigmaBound = 10.0;
constexpr int kBoostMinStationSamples = 30;

// Fits one station given standardized candidate columns (column-major) and
// observations. Exposed for targeted testing.
BoostCoefficients fit_boost_station(const std::vector<std::vector<double>>& columns,
                                    const std::vector<double>& obs,
                                    const BoostOptions& options);

// Fits every station in the dataset. Standardization of the candidate
// predictors is handled internally from the pooled training set and stored in
// the model for prediction time.
BoostModel fit_emos_boost(const ForecastDataset& train, const BoostOptions& options);

// x_standardized: candidate predictors already on the training scale.
GaussianForecast predict_emos_boost(const BoostCoefficients& k,
                                    const std::vector<double>& x_standardized);
// Full routing: extracts candidates from the sample and standardizes them.
GaussianForecast predict_emos_boost(const BoostModel& model, const Sample& sample);

// Mean negative log-likelihood helper shared with tests.
double boost_mean_log_score(const BoostCoefficients& k,
                            const std::vector<std::vector<double>>& columns,
                            const std::vector<double>& obs);

}  // namespace epp
