#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "epp/data.hpp"
#include "epp/errors.hpp"
#include "epp/importance.hpp"
#include "epp/rng.hpp"
#include "epp/scoring.hpp"

using namespace epp;

namespace {

// Small full-spec dataset from the synthetic generator.
ForecastDataset small_synthetic(int stations, int days, std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.stations = stations;
  cfg.days = days;
  cfg.members = 5;
  cfg.seed = seed;
  return generate_synthetic(cfg);
}

}  // namespace

TEST_SUITE("importance") {
  TEST_CASE("permutation plans") {
    SUBCASE("identity plan maps every index to itself") {
      const PermutationPlan p = identity_permutation_plan(7);
      REQUIRE(p.perm.size() == 7);
      for (std::size_t i = 0; i < 7; ++i) CHECK(p.perm[i] == i);
    }
    SUBCASE("seeded plan is a bijection and reproducible") {
      const PermutationPlan a = make_permutation_plan(100, 5);
      const PermutationPlan b = make_permutation_plan(100, 5);
      CHECK(a.perm == b.perm);
      std::vector<std::size_t> sorted = a.perm;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
      const PermutationPlan c = make_permutation_plan(100, 6);
      CHECK(a.perm != c.perm);
    }
  }

  TEST_CASE("identity permutation gives exactly zero for every feature") {
    const ForecastDataset ds = small_synthetic(3, 40, 11);
    const EmosModel model = fit_emos(ds, EmosScope::global);
    const auto report =
        permutation_importance(make_scorer(model, ds), "emos-gl", ds,
                               identity_permutation_plan(ds.samples.size()));
    REQUIRE(report.values.size() == ds.features.count());
    CHECK(report.features == ds.features.names);
    for (const double v : report.values) CHECK(v == 0.0);
    CHECK(report.baseline_crps > 0.0);
  }

  TEST_CASE("features outside the model's inputs have exactly zero importance") {
    // The plain affine model reads only t2m_mean / t2m_std; shuffling any other
    // column cannot change a single prediction.
    const ForecastDataset ds = small_synthetic(3, 60, 13);
    const EmosModel model = fit_emos(ds, EmosScope::global);
    const auto report =
        permutation_importance(make_scorer(model, ds), "emos-gl", ds,
                               make_permutation_plan(ds.samples.size(), 2));
    const int im = ds.features.index_of("t2m_mean");
    const int is = ds.features.index_of("t2m_std");
    for (std::size_t v = 0; v < report.values.size(); ++v) {
      if (static_cast<int>(v) == im || static_cast<int>(v) == is) continue;
      CHECK(std::abs(report.values[v]) < 1e-12);
    }
    // Shuffling the mean forecast must hurt on real signal.
    CHECK(report.values[static_cast<std::size_t>(im)] > 0.0);
  }

  TEST_CASE("constant columns have exactly zero importance") {
    ForecastDataset ds = small_synthetic(3, 60, 17);
    const int iso = ds.features.index_of("cape_mean");
    REQUIRE(iso >= 0);
    for (auto& s : ds.samples) s.predictors[static_cast<std::size_t>(iso)] = 4.25;

    NetworkConfig cfg;
    cfg.variant = NetVariant::nn_aux;
    cfg.hidden_nodes = 8;
    cfg.batch_size = 16;
    cfg.epochs = 3;
    cfg.run_count = 1;
    cfg.patience = 2;
    cfg.seed = 4;
    const NetworkModel model = train_network_model(ds, cfg);
    const auto report =
        permutation_importance(make_scorer(model, ds), "nn-aux", ds,
                               make_permutation_plan(ds.samples.size(), 9));
    CHECK(report.values[static_cast<std::size_t>(iso)] == 0.0);
  }

  TEST_CASE("dominant predictor ranks first") {
    // Rewire the outcome so the ensemble mean carries nearly all the signal.
    ForecastDataset ds = small_synthetic(4, 80, 23);
    const int im = ds.features.index_of("t2m_mean");
    Rng rng(3);
    for (auto& s : ds.samples) {
      s.obs = 2.0 * s.predictors[static_cast<std::size_t>(im)] + rng.normal(0.0, 0.3);
    }

    NetworkConfig cfg;
    cfg.variant = NetVariant::nn_aux_emb;
    cfg.hidden_nodes = 12;
    cfg.n_emb = 2;
    cfg.batch_size = 32;
    cfg.epochs = 15;
    cfg.run_count = 1;
    cfg.patience = 3;
    cfg.seed = 8;
    const NetworkModel model = train_network_model(ds, cfg);
    const auto report =
        permutation_importance(make_scorer(model, ds), "nn-aux-emb", ds,
                               make_permutation_plan(ds.samples.size(), 7));
    const auto rows = report.sorted_descending();
    REQUIRE_FALSE(rows.empty());
    CHECK(rows.front().feature == "t2m_mean");
    CHECK(rows.front().value > 0.0);
    // Sorted view is genuinely descending and a permutation of all features.
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i - 1].value >= rows[i].value);
    }
    CHECK(rows.size() == ds.features.count());
  }

  TEST_CASE("deterministic for a fixed plan seed") {
    const ForecastDataset ds = small_synthetic(3, 50, 29);
    const EmosModel model = fit_emos(ds, EmosScope::global);
    const auto a = permutation_importance(make_scorer(model, ds), "m", ds,
                                          make_permutation_plan(ds.samples.size(), 41));
    const auto b = permutation_importance(make_scorer(model, ds), "m", ds,
                                          make_permutation_plan(ds.samples.size(), 41));
    CHECK(a.values == b.values);
    CHECK(a.baseline_crps == b.baseline_crps);
  }

  TEST_CASE("every family routes through the shared interface") {
    const ForecastDataset ds = small_synthetic(3, 80, 31);

    SUBCASE("boosted affine model") {
      BoostOptions opt;
      opt.max_iter = 40;
      const BoostModel model = fit_emos_boost(ds, opt);
      const auto report =
          permutation_importance(make_scorer(model, ds), "emos-loc-bst", ds,
                                 make_permutation_plan(ds.samples.size(), 3));
      const int im = ds.features.index_of("t2m_mean");
      CHECK(report.values[static_cast<std::size_t>(im)] > 0.0);
      for (const double v : report.values) CHECK(std::isfinite(v));
    }

    SUBCASE("quantile forest") {
      QrfOptions opt;
      opt.n_trees = 25;
      opt.min_leaf_size = 8;
      const QrfModel model = fit_qrf(ds, opt);
      const auto report =
          permutation_importance(make_scorer(model, ds), "qrf", ds,
                                 make_permutation_plan(ds.samples.size(), 3));
      const int im = ds.features.index_of("t2m_mean");
      CHECK(report.values[static_cast<std::size_t>(im)] > 0.0);
      for (const double v : report.values) CHECK(std::isfinite(v));
    }
  }

  TEST_CASE("validation") {
    const ForecastDataset ds = small_synthetic(3, 40, 37);
    const EmosModel model = fit_emos(ds, EmosScope::global);

    SUBCASE("plan size must match the dataset") {
      CHECK_THROWS_AS(
          permutation_importance(make_scorer(model, ds), "m", ds,
                                 make_permutation_plan(ds.samples.size() - 1, 1)),
          DimensionMismatchError);
    }
    SUBCASE("empty dataset") {
      ForecastDataset empty;
      empty.features = ds.features;
      CHECK_THROWS_AS(
          permutation_importance(make_scorer(model, ds), "m", empty,
                                 identity_permutation_plan(0)),
          EmptyDatasetError);
    }
    SUBCASE("feature-spec mismatch is rejected by the adapters") {
      // Columns in a different position than at fit time.
      ForecastDataset renamed = ds;
      std::swap(renamed.features.names[0], renamed.features.names[1]);
      CHECK_THROWS_AS(make_scorer(model, renamed), FeatureMismatchError);

      // Different column count than at fit time.
      ForecastDataset narrow = ds;
      narrow.features = FeatureSpec::t2m_only();
      QrfOptions opt;
      opt.n_trees = 3;
      opt.min_leaf_size = 10;
      const QrfModel forest = fit_qrf(ds, opt);
      CHECK_THROWS_AS(make_scorer(forest, narrow), FeatureMismatchError);

      NetworkConfig cfg;
      cfg.variant = NetVariant::fcn;
      cfg.batch_size = 12;
      cfg.epochs = 1;
      cfg.run_count = 1;
      cfg.seed = 2;
      const NetworkModel net = train_network_model(ds, cfg);
      CHECK_THROWS_AS(make_scorer(net, renamed), FeatureMismatchError);
    }
  }
}
