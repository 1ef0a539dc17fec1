#pragma once

#include <cstdint>
#include <vector>

#include "epp/data.hpp"
#include "epp/scoring.hpp"

namespace epp {

// Quantile regression forests, one forest per station: variance-minimizing
// CART splits on bootstrap resamples, prediction by averaging the empirical
// CDFs of the leaves a probe lands in.
struct QrfOptions {
  int n_trees = 200;
  int mtry = 0;  // 0: resolved to ceil(p/2) at fit time
  int min_leaf_size = 10;
  std::uint64_t seed = 1;
  bool bootstrap = true;  // off: every tree sees the full station sample
};

struct QrfNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_begin = -1;  // [begin, end) into QrfTree::leaf_values, sorted
  int leaf_end = -1;
};

struct QrfTree {
  std::vector<QrfNode> nodes;  // root at index 0
  std::vector<double> leaf_values;
};

struct QrfModel {
  QrfOptions options;      // with mtry resolved
  int predictor_count = 0;
  std::vector<std::vector<QrfTree>> per_station;
};

// Default evaluation levels: 51 equally spaced interior quantiles k/52.
std::vector<double> default_quantile_levels();

QrfModel fit_qrf(const ForecastDataset& train, const QrfOptions& options);

// Fits one station's forest from column-major predictors. Exposed for tests.
std::vector<QrfTree> fit_qrf_station(const std::vector<std::vector<double>>& columns,
                                     const std::vector<double>& obs,
                                     const QrfOptions& options_resolved,
                                     std::uint64_t station_seed);

QuantileForecast predict_quantiles(const QrfModel& model, std::size_t station_index,
                                   const std::vector<double>& x,
                                   const std::vector<double>& levels);
QuantileForecast predict_quantiles(const QrfModel& model, const Sample& sample,
                                   const std::vector<double>& levels);

// The leaf a probe reaches in one tree. Exposed for oracle tests.
const QrfNode& route_to_leaf(const QrfTree& tree, const std::vector<double>& x);

}  // namespace epp
