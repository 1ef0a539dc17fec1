#include "epp/importance.hpp"

#include <algorithm>
#include <numeric>

#include "epp/errors.hpp"
#include "epp/rng.hpp"
#include "epp/scoring.hpp"

namespace epp {

PermutationPlan make_permutation_plan(std::size_t n, std::uint64_t seed) {
  PermutationPlan plan;
  plan.seed = seed;
  plan.perm.resize(n);
  std::iota(plan.perm.begin(), plan.perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(plan.perm);
  return plan;
}

PermutationPlan identity_permutation_plan(std::size_t n) {
  PermutationPlan plan;
  plan.seed = 0;
  plan.perm.resize(n);
  std::iota(plan.perm.begin(), plan.perm.end(), 0);
  return plan;
}

std::vector<ImportanceEntry> ImportanceReport::sorted_descending() const {
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<ImportanceEntry> rows;
  rows.reserve(order.size());
  for (const std::size_t i : order) rows.push_back({features[i], values[i]});
  return rows;
}

namespace {

double mean_score(const SampleScorer& scorer, const ForecastDataset& ds) {
  double total = 0.0;
  for (const auto& s : ds.samples) total += scorer(s);
  return total / static_cast<double>(ds.samples.size());
}

}  // namespace

ImportanceReport permutation_importance(const SampleScorer& scorer,
                                        const std::string& model_name,
                                        const ForecastDataset& valid,
                                        const PermutationPlan& plan) {
  if (valid.samples.empty()) {
    throw EmptyDatasetError("permutation_importance: no validation samples");
  }
  if (plan.perm.size() != valid.samples.size()) {
    throw DimensionMismatchError("permutation plan covers " +
                                 std::to_string(plan.perm.size()) +
                                 " samples, dataset has " +
                                 std::to_string(valid.samples.size()));
  }

  ImportanceReport report;
  report.model_name = model_name;
  report.seed = plan.seed;
  report.features = valid.features.names;
  report.baseline_crps = mean_score(scorer, valid);

  const std::size_t n = valid.samples.size();
  ForecastDataset work = valid;  // one mutable column is swapped in and out
  report.values.reserve(report.features.size());
  for (std::size_t v = 0; v < report.features.size(); ++v) {
    for (std::size_t i = 0; i < n; ++i) {
      work.samples[i].predictors[v] = valid.samples[plan.perm[i]].predictors[v];
    }
    report.values.push_back(mean_score(scorer, work) - report.baseline_crps);
    for (std::size_t i = 0; i < n; ++i) {
      work.samples[i].predictors[v] = valid.samples[i].predictors[v];
    }
  }
  return report;
}

SampleScorer make_scorer(const EmosModel& model, const ForecastDataset& valid) {
  const int im = valid.features.index_of("t2m_mean");
  const int is = valid.features.index_of("t2m_std");
  if (im != model.mean_index || is != model.sd_index || im < 0 || is < 0) {
    throw FeatureMismatchError("t2m_mean/t2m_std not where the affine model expects");
  }
  return [&model](const Sample& s) {
    return crps_normal(predict_emos(model, s), s.obs);
  };
}

SampleScorer make_scorer(const BoostModel& model, const ForecastDataset& valid) {
  for (std::size_t k = 0; k < model.feature_names.size(); ++k) {
    const int idx = valid.features.index_of(model.feature_names[k]);
    if (idx != model.feature_indices[k]) {
      throw FeatureMismatchError("boosted model predictor '" +
                                 model.feature_names[k] +
                                 "' not at its fitted position");
    }
  }
  return [&model](const Sample& s) {
    return crps_normal(predict_emos_boost(model, s), s.obs);
  };
}

SampleScorer make_scorer(const QrfModel& model, const ForecastDataset& valid) {
  if (model.predictor_count != static_cast<int>(valid.features.count())) {
    throw FeatureMismatchError("forest fitted on " +
                               std::to_string(model.predictor_count) +
                               " predictors, dataset has " +
                               std::to_string(valid.features.count()));
  }
  return [&model](const Sample& s) {
    return crps_quantile_approx(
        predict_quantiles(model, s, default_quantile_levels()), s.obs);
  };
}

SampleScorer make_scorer(const NetworkModel& model, const ForecastDataset& valid) {
  if (variant_uses_aux(model.config.variant)) {
    if (model.input_indices.size() != valid.features.count()) {
      throw FeatureMismatchError("network consumes " +
                                 std::to_string(model.input_indices.size()) +
                                 " predictors, dataset has " +
                                 std::to_string(valid.features.count()));
    }
  } else {
    const int im = valid.features.index_of("t2m_mean");
    const int is = valid.features.index_of("t2m_std");
    if (model.input_indices.size() != 2 || im != model.input_indices[0] ||
        is != model.input_indices[1]) {
      throw FeatureMismatchError("t2m_mean/t2m_std not where the network expects");
    }
  }
  return [&model](const Sample& s) {
    return crps_normal(predict_network(model, s), s.obs);
  };
}

}  // namespace epp
