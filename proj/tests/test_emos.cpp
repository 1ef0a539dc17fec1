#include "epp/emos.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "epp/errors.hpp"
#include "epp/optim.hpp"
#include "epp/rng.hpp"

using namespace epp;

TEST_SUITE("optim") {

TEST_CASE("bfgs solves a quadratic to gradient tolerance quickly") {
  // f = (x-3)^2 + 10*(y+1)^2, anisotropic on purpose.
  const auto f = [](const std::vector<double>& x, std::vector<double>& g) {
    g[0] = 2.0 * (x[0] - 3.0);
    g[1] = 20.0 * (x[1] + 1.0);
    return (x[0] - 3.0) * (x[0] - 3.0) + 10.0 * (x[1] + 1.0) * (x[1] + 1.0);
  };
  const OptimResult r = minimize_bfgs(f, {0.0, 0.0});
  CHECK(r.converged);
  CHECK(r.iterations < 50);
  CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("bfgs follows the rosenbrock valley") {
  const auto f = [](const std::vector<double>& x, std::vector<double>& g) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  const OptimResult r = minimize_bfgs(f, {-1.2, 1.0});
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("bfgs reports the best iterate when iterations run out") {
  const auto f = [](const std::vector<double>& x, std::vector<double>& g) {
    g[0] = 2.0 * x[0];
    return x[0] * x[0];
  };
  const OptimResult r = minimize_bfgs(f, {100.0}, 1);
  CHECK_FALSE(r.converged);
  CHECK(r.f <= 100.0 * 100.0);
}

}  // TEST_SUITE("optim")

namespace {

// Builds a two-column dataset whose truth is exactly the affine law the model
// assumes: y ~ Normal(a + b*m, (c + d*s)^2).
ForecastDataset affine_dataset(std::size_t n, double a, double b, double c, double d,
                               std::uint64_t seed, int n_stations = 1) {
  ForecastDataset ds;
  ds.features = FeatureSpec::t2m_only();
  for (int s = 0; s < n_stations; ++s) {
    ds.stations.push_back(Station{"S" + std::to_string(s), 100.0, 100.0, 50.0, 8.0});
  }
  Rng rng(seed);
  Date day{2015, 1, 1};
  for (std::size_t i = 0; i < n; ++i) {
    Sample smp;
    smp.station_index = static_cast<int>(i % n_stations);
    smp.valid_time = day;
    if (smp.station_index == n_stations - 1) day = add_days(day, 1);
    const double m = rng.uniform(-5.0, 15.0);
    const double s = rng.uniform(0.2, 3.0);
    smp.predictors = {m, s};
    smp.obs = a + b * m + rng.normal(0.0, c + d * s);
    ds.samples.push_back(smp);
  }
  return ds;
}

double mean_train_crps(const ForecastDataset& ds, const EmosCoefficients& k) {
  double total = 0.0;
  for (const auto& s : ds.samples) {
    const GaussianForecast f = predict_emos(k, s.predictors[0], s.predictors[1]);
    total += crps_normal(f.mu, f.sigma, s.obs);
  }
  return total / static_cast<double>(ds.samples.size());
}

}  // namespace

TEST_SUITE("emos") {

TEST_CASE("prediction arithmetic and clamping") {
  EmosCoefficients identity;  // (0,1,0,1)
  GaussianForecast f = predict_emos(identity, 10.0, 2.0);
  CHECK(f.mu == 10.0);
  CHECK(f.sigma == 2.0);

  EmosCoefficients k{1.0, 0.5, 0.2, 0.1, true, 0};
  f = predict_emos(k, 10.0, 2.0);
  CHECK(f.mu == doctest::Approx(6.0));
  CHECK(f.sigma == doctest::Approx(0.4));

  EmosCoefficients neg{0.0, 1.0, -5.0, 0.0, true, 0};
  f = predict_emos(neg, 123.0, 9.0);
  CHECK(f.sigma == kSigmaFloor);
}

TEST_CASE("recovers the generating coefficients from affine data") {
  const ForecastDataset ds = affine_dataset(50000, 1.0, 1.0, 0.5, 0.5, 2024);
  const EmosModel m = fit_emos(ds, EmosScope::global);
  CHECK(m.global.converged);
  CHECK(m.global.a == doctest::Approx(1.0).epsilon(0.05));
  CHECK(m.global.b == doctest::Approx(1.0).epsilon(0.05));
  CHECK(m.global.c == doctest::Approx(0.5).epsilon(0.1));
  CHECK(m.global.d == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("near-identity coefficients on a calibrated synthetic ensemble") {
  SyntheticConfig cfg;
  cfg.stations = 20;
  cfg.days = 500;
  cfg.seed = 314;
  cfg.bias_amplitude = 0.0;
  cfg.nonlinearity_amplitude = 0.0;
  cfg.station_bias_scale = 0.0;
  cfg.underdispersion = 1.0;
  const ForecastDataset ds = generate_synthetic(cfg);
  const EmosModel m = fit_emos(ds, EmosScope::global);
  CHECK(std::abs(m.global.a) < 0.05);
  CHECK(m.global.b == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sample thresholds and local fallback") {
  const ForecastDataset tiny = affine_dataset(10, 0.0, 1.0, 0.5, 0.5, 3);
  CHECK_THROWS_AS(fit_emos(tiny, EmosScope::global), TooFewSamplesError);

  // Station 0 gets plenty of samples, station 1 only a handful.
  ForecastDataset mixed = affine_dataset(200, 0.0, 1.0, 0.5, 0.5, 4);
  mixed.stations.push_back(Station{"tiny", 1.0, 1.0, 2.0, 3.0});
  for (int i = 0; i < 5; ++i) {
    Sample s = mixed.samples[static_cast<std::size_t>(i)];
    s.station_index = 1;
    mixed.samples.push_back(s);
  }
  const EmosModel m = fit_emos(mixed, EmosScope::local);
  REQUIRE(m.per_station.size() == 2);
  CHECK_FALSE(m.used_fallback[0]);
  CHECK(m.used_fallback[1]);
  CHECK(m.per_station[1].a == m.global.a);
  CHECK(m.per_station[1].d == m.global.d);
  CHECK(!m.warnings.empty());
}

TEST_CASE("optimizer never loses to the identity initialization") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const ForecastDataset ds = affine_dataset(800, 0.3, 1.2, 0.2, 0.8, seed);
    const EmosModel m = fit_emos(ds, EmosScope::global);
    const EmosCoefficients identity;
    CHECK(mean_train_crps(ds, m.global) <= mean_train_crps(ds, identity) + 1e-9);
  }
}

TEST_CASE("local fit equals a global fit restricted to that station") {
  const ForecastDataset ds = affine_dataset(2000, 0.5, 0.9, 0.3, 0.6, 99, 4);
  const EmosModel local = fit_emos(ds, EmosScope::local);

  ForecastDataset only2;
  only2.features = ds.features;
  only2.stations = ds.stations;
  for (const auto& s : ds.samples) {
    if (s.station_index == 2) only2.samples.push_back(s);
  }
  const EmosModel global_sub = fit_emos(only2, EmosScope::global);
  CHECK(local.per_station[2].a == doctest::Approx(global_sub.global.a).epsilon(1e-6));
  CHECK(local.per_station[2].b == doctest::Approx(global_sub.global.b).epsilon(1e-6));
  CHECK(local.per_station[2].c == doctest::Approx(global_sub.global.c).epsilon(1e-6));
  CHECK(local.per_station[2].d == doctest::Approx(global_sub.global.d).epsilon(1e-6));
}

TEST_CASE("fit is invariant to sample order") {
  ForecastDataset ds = affine_dataset(1500, 0.5, 0.9, 0.3, 0.6, 7);
  const EmosModel before = fit_emos(ds, EmosScope::global);
  Rng rng(1234);
  rng.shuffle(ds.samples);
  const EmosModel after = fit_emos(ds, EmosScope::global);
  CHECK(before.global.a == doctest::Approx(after.global.a).epsilon(1e-6));
  CHECK(before.global.b == doctest::Approx(after.global.b).epsilon(1e-6));
  CHECK(before.global.c == doctest::Approx(after.global.c).epsilon(1e-6));
  CHECK(before.global.d == doctest::Approx(after.global.d).epsilon(1e-6));
}

TEST_CASE("prediction by sample routes through the station's coefficients") {
  const ForecastDataset ds = affine_dataset(400, 0.0, 1.0, 0.5, 0.5, 11, 2);
  const EmosModel m = fit_emos(ds, EmosScope::local);
  const Sample& s = ds.samples[3];
  const GaussianForecast direct = predict_emos(
      m.per_station[static_cast<std::size_t>(s.station_index)], s.predictors[0],
      s.predictors[1]);
  const GaussianForecast routed = predict_emos(m, s);
  CHECK(direct.mu == routed.mu);
  CHECK(direct.sigma == routed.sigma);
  CHECK_THROWS_AS(predict_emos(m, 99, 0.0, 1.0), UnknownStationError);
}

}  // TEST_SUITE("emos")
