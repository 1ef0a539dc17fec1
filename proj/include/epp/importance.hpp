#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "epp/boosting.hpp"
#include "epp/data.hpp"
#include "epp/emos.hpp"
#include "epp/network.hpp"
#include "epp/qrf.hpp"

namespace epp {

// Permutation feature importance: shuffle one predictor column at a time with
// a single fixed permutation of the (station, time) sample indices and report
// the increase in mean CRPS over the unshuffled baseline.

struct PermutationPlan {
  std::uint64_t seed = 1;
  std::vector<std::size_t> perm;  // bijection on 0..n-1
};

// Seeded shuffle of 0..n-1. Reproducible: same (n, seed) gives the same plan.
PermutationPlan make_permutation_plan(std::size_t n, std::uint64_t seed);
// perm[i] == i; permuted data equals the original, so every importance is 0.
PermutationPlan identity_permutation_plan(std::size_t n);

// Scores one sample: the fitted model's CRPS against sample.obs.
using SampleScorer = std::function<double(const Sample&)>;

struct ImportanceEntry {
  std::string feature;
  double value = 0.0;
};

struct ImportanceReport {
  std::string model_name;
  std::uint64_t seed = 0;
  double baseline_crps = 0.0;
  std::vector<std::string> features;  // dataset feature order
  std::vector<double> values;         // mean CRPS(permuted) - mean CRPS(baseline)

  // Rows sorted by importance, highest first (ties keep feature order).
  std::vector<ImportanceEntry> sorted_descending() const;
};

ImportanceReport permutation_importance(const SampleScorer& scorer,
                                        const std::string& model_name,
                                        const ForecastDataset& valid,
                                        const PermutationPlan& plan);

// Family adapters: check the model against the dataset's feature spec
// (FeatureMismatchError on disagreement) and wrap predict + CRPS.
SampleScorer make_scorer(const EmosModel& model, const ForecastDataset& valid);
SampleScorer make_scorer(const BoostModel& model, const ForecastDataset& valid);
SampleScorer make_scorer(const QrfModel& model, const ForecastDataset& valid);
SampleScorer make_scorer(const NetworkModel& model, const ForecastDataset& valid);

}  // namespace epp
