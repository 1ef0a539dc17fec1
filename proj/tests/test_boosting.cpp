#include "epp/boosting.hpp"

#include <cmath>
#include <set>

#include "doctest.h"
#include "epp/errors.hpp"
#include "epp/rng.hpp"

using namespace epp;

namespace {

struct StationData {
  std::vector<std::vector<double>> cols;
  std::vector<double> obs;
};

// q iid standard-normal predictor columns; y = b0 + b1*col0 + noise(sigma).
StationData sparse_mean_signal(std::size_t n, std::size_t q, double b0, double b1,
                               double sigma, std::uint64_t seed) {
  StationData d;
  d.cols.assign(q, {});
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < q; ++j) d.cols[j].push_back(rng.normal());
    d.obs.push_back(b0 + b1 * d.cols[0][i] + rng.normal(0.0, sigma));
  }
  return d;
}

std::set<int> selected_predictors(const BoostCoefficients& k) {
  std::set<int> s;
  for (std::size_t j = 1; j < k.beta.size(); ++j) {
    if (k.beta[j] != 0.0 || k.gamma[j] != 0.0) s.insert(static_cast<int>(j - 1));
  }
  return s;
}

}  // namespace

TEST_SUITE("boosting") {

TEST_CASE("prediction arithmetic for fixed coefficients") {
  BoostCoefficients k;
  k.beta = {0.0, 0.0, 0.0};
  k.gamma = {0.0, 0.0, 0.0};
  GaussianForecast f = predict_emos_boost(k, {3.0, -1.0});
  CHECK(f.mu == 0.0);
  CHECK(f.sigma == 1.0);  // exp(0)

  k.beta = {1.0, 2.0, 0.0};
  f = predict_emos_boost(k, {3.0, 99.0});
  CHECK(f.mu == doctest::Approx(7.0));
  CHECK(f.sigma == doctest::Approx(1.0));

  k.gamma = {std::log(2.0), 0.0, 0.0};
  f = predict_emos_boost(k, {-4.0, 17.0});
  CHECK(f.sigma == doctest::Approx(2.0));

  // The log link is bounded, so absurd coefficients stay finite.
  k.gamma = {500.0, 0.0, 0.0};
  CHECK(predict_emos_boost(k, {0.0, 0.0}).sigma == doctest::Approx(std::exp(10.0)));

  CHECK_THROWS_AS(predict_emos_boost(k, {1.0}), DimensionMismatchError);
}

TEST_CASE("zero iterations keep the all-zero coefficients") {
  const StationData d = sparse_mean_signal(100, 4, 3.0, 2.0, 1.0, 1);
  BoostOptions opts;
  opts.max_iter = 0;
  const BoostCoefficients k = fit_boost_station(d.cols, d.obs, opts);
  CHECK(k.iterations_used == 0);
  CHECK(k.nonzero_count() == 0);
  const GaussianForecast f = predict_emos_boost(k, {1.0, 1.0, 1.0, 1.0});
  CHECK(f.mu == 0.0);
  CHECK(f.sigma == 1.0);
}

TEST_CASE("recovers a sparse mean signal and leaves the spread alone") {
  const StationData d = sparse_mean_signal(4000, 6, 2.0, 1.5, 1.0, 42);
  const BoostCoefficients k = fit_boost_station(d.cols, d.obs, BoostOptions{});
  CHECK(k.iterations_used > 5);
  CHECK(selected_predictors(k) == std::set<int>{0});
  CHECK(k.beta[1] > 1.0);              // walked towards 1.5 in 0.05 steps
  CHECK(k.beta[0] == doctest::Approx(2.0).epsilon(0.1));
  for (std::size_t j = 1; j < k.gamma.size(); ++j) CHECK(k.gamma[j] == 0.0);
}

TEST_CASE("selection precision across seeds is at least 0.9") {
  double precision_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const StationData d = sparse_mean_signal(1000, 8, 1.0, 1.2, 1.0, seed);
    const BoostCoefficients k = fit_boost_station(d.cols, d.obs, BoostOptions{});
    const std::set<int> sel = selected_predictors(k);
    if (sel.empty()) continue;  // counts as zero precision
    precision_sum += sel.count(0) ? 1.0 / static_cast<double>(sel.size()) : 0.0;
  }
  CHECK(precision_sum / 10.0 >= 0.9);
}

TEST_CASE("aic stops within a few iterations on pure noise") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed * 17);
    StationData d;
    d.cols.assign(5, {});
    for (int i = 0; i < 400; ++i) {
      for (auto& c : d.cols) c.push_back(rng.normal());
      d.obs.push_back(rng.normal());
    }
    const BoostCoefficients k = fit_boost_station(d.cols, d.obs, BoostOptions{});
    CHECK(k.iterations_used < 50);
  }
}

TEST_CASE("nonzero count is bounded by the iteration budget") {
  const StationData d = sparse_mean_signal(800, 6, 0.5, 1.0, 0.7, 9);
  const BoostCoefficients k = fit_boost_station(d.cols, d.obs, BoostOptions{});
  CHECK(k.nonzero_count() <= 2 * k.iterations_used + 2);
}

TEST_CASE("training score is non-increasing along the iteration path") {
  const StationData d = sparse_mean_signal(600, 5, 1.0, 1.3, 0.8, 31);
  double prev = boost_mean_log_score(
      fit_boost_station(d.cols, d.obs, BoostOptions{0, 0.05, true}), d.cols, d.obs);
  for (int budget = 1; budget <= 15; ++budget) {
    BoostOptions opts;
    opts.max_iter = budget;
    const BoostCoefficients k = fit_boost_station(d.cols, d.obs, opts);
    const double score = boost_mean_log_score(k, d.cols, d.obs);
    CHECK(score <= prev + 1e-12);
    prev = score;
  }
}

TEST_CASE("spread signal is picked up through the gamma coefficients") {
  // y has constant mean but its scale rides on column 2.
  Rng rng(77);
  StationData d;
  d.cols.assign(4, {});
  for (int i = 0; i < 4000; ++i) {
    for (auto& c : d.cols) c.push_back(rng.normal());
    d.obs.push_back(rng.normal(0.0, std::exp(0.2 + 0.6 * d.cols[2].back())));
  }
  const BoostCoefficients k = fit_boost_station(d.cols, d.obs, BoostOptions{});
  CHECK(k.gamma[3] > 0.3);  // column 2 drives the spread link upward
  CHECK(selected_predictors(k).count(2) == 1);
}

TEST_CASE("dataset-level fit excludes station descriptors and routes predictions") {
  SyntheticConfig cfg;
  cfg.stations = 3;
  cfg.days = 120;
  cfg.seed = 5;
  const ForecastDataset ds = generate_synthetic(cfg);
  BoostOptions opts;
  opts.max_iter = 200;
  const BoostModel m = fit_emos_boost(ds, opts);
  CHECK(m.feature_names.size() == ds.features.count() - 4);
  for (const auto& name : m.feature_names) {
    CHECK(name.rfind("station_", 0) != 0);
    CHECK(name != "orog");
  }
  CHECK(m.per_station.size() == 3);

  // Standardization stored in the model matches pooled moments.
  const int j = m.feature_indices[0];
  double mean = 0.0;
  for (const auto& s : ds.samples) mean += s.predictors[j];
  mean /= static_cast<double>(ds.samples.size());
  CHECK(m.feature_mean[0] == doctest::Approx(mean).epsilon(1e-12));

  // Fitted per-station model beats the zero model on its own station.
  std::vector<std::vector<double>> cols(m.feature_indices.size());
  std::vector<double> obs;
  for (const auto& s : ds.samples) {
    if (s.station_index != 1) continue;
    obs.push_back(s.obs);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      cols[c].push_back((s.predictors[m.feature_indices[c]] - m.feature_mean[c]) /
                        m.feature_sd[c]);
    }
  }
  BoostCoefficients zero;
  zero.beta.assign(cols.size() + 1, 0.0);
  zero.gamma.assign(cols.size() + 1, 0.0);
  CHECK(boost_mean_log_score(m.per_station[1], cols, obs) <
        boost_mean_log_score(zero, cols, obs));

  const GaussianForecast f = predict_emos_boost(m, ds.samples[10]);
  CHECK(std::isfinite(f.mu));
  CHECK(f.sigma >= kSigmaFloor);

  Sample bad = ds.samples[0];
  bad.station_index = 12;
  CHECK_THROWS_AS(predict_emos_boost(m, bad), UnknownStationError);
}

TEST_CASE("too little data per station is rejected") {
  const StationData d = sparse_mean_signal(10, 3, 0.0, 1.0, 1.0, 2);
  CHECK_THROWS_AS(fit_boost_station(d.cols, d.obs, BoostOptions{}), TooFewSamplesError);
}

}  // TEST_SUITE
