#include "epp/emos.hpp"

#include <cmath>

#include "epp/errors.hpp"
#include "epp/optim.hpp"

namespace epp {

EmosCoefficients fit_emos_pool(const std::vector<double>& x_mean,
                               const std::vector<double>& x_sd,
                               const std::vector<double>& obs) {
  const std::size_t n = obs.size();
  if (x_mean.size() != n || x_sd.size() != n) {
    throw DimensionMismatchError("fit_emos_pool: input lengths differ");
  }
  if (n == 0) throw EmptyDatasetError("fit_emos_pool: no samples");

  // Mean CRPS over the pool; sigma clamped at the floor with zero subgradient
  // below it, which keeps the affine link while ruling out invalid scales.
  const auto objective = [&](const std::vector<double>& k, std::vector<double>& g) {
    long double f = 0.0L, ga = 0.0L, gb = 0.0L, gc = 0.0L, gd = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const double mu = k[0] + k[1] * x_mean[i];
      const double sigma_raw = k[2] + k[3] * x_sd[i];
      const bool clamped = sigma_raw < kSigmaFloor;
      const double sigma = clamped ? kSigmaFloor : sigma_raw;
      f += crps_normal(mu, sigma, obs[i]);
      const GaussianGrad gr = crps_normal_grad(mu, sigma, obs[i]);
      ga += gr.d_mu;
      gb += gr.d_mu * x_mean[i];
      if (!clamped) {
        gc += gr.d_sigma;
        gd += gr.d_sigma * x_sd[i];
      }
    }
    const double inv = 1.0 / static_cast<double>(n);
    g[0] = static_cast<double>(ga) * inv;
    g[1] = static_cast<double>(gb) * inv;
    g[2] = static_cast<double>(gc) * inv;
    g[3] = static_cast<double>(gd) * inv;
    return static_cast<double>(f) * inv;
  };

  const OptimResult r = minimize_bfgs(objective, {0.0, 1.0, 0.0, 1.0});
  EmosCoefficients k;
  k.a = r.x[0];
  k.b = r.x[1];
  k.c = r.x[2];
  k.d = r.x[3];
  k.converged = r.converged;
  k.iterations = r.iterations;
  return k;
}

namespace {

struct Columns {
  std::vector<double> mean, sd, obs;
};

Columns pull_columns(const ForecastDataset& data, int im, int is,
                     int station = -1) {
  Columns c;
  for (const auto& s : data.samples) {
    if (station >= 0 && s.station_index != station) continue;
    c.mean.push_back(s.predictors[im]);
    c.sd.push_back(s.predictors[is]);
    c.obs.push_back(s.obs);
  }
  return c;
}

}  // namespace

EmosModel fit_emos(const ForecastDataset& train, EmosScope scope) {
  EmosModel model;
  model.scope = scope;
  model.mean_index = train.features.index_of("t2m_mean");
  model.sd_index = train.features.index_of("t2m_std");
  if (model.mean_index < 0 || model.sd_index < 0) {
    throw MissingColumnError("fit_emos: dataset lacks t2m_mean/t2m_std predictors");
  }
  if (train.samples.size() < static_cast<std::size_t>(kEmosMinGlobalSamples)) {
    throw TooFewSamplesError("fit_emos: need >= " +
                             std::to_string(kEmosMinGlobalSamples) +
                             " samples, got " + std::to_string(train.samples.size()));
  }

  const Columns pool = pull_columns(train, model.mean_index, model.sd_index);
  model.global = fit_emos_pool(pool.mean, pool.sd, pool.obs);
  if (!model.global.converged) {
    model.warnings.push_back("global fit stopped before gradient tolerance");
  }
  if (scope == EmosScope::global) return model;

  const std::size_t n_st = train.stations.size();
  model.per_station.resize(n_st);
  model.used_fallback.assign(n_st, false);
  for (std::size_t st = 0; st < n_st; ++st) {
    const Columns c = pull_columns(train, model.mean_index, model.sd_index,
                                   static_cast<int>(st));
    if (c.obs.size() < static_cast<std::size_t>(kEmosMinLocalSamples)) {
      model.per_station[st] = model.global;
      model.used_fallback[st] = true;
      model.warnings.push_back("station " + train.stations[st].id + " has " +
                               std::to_string(c.obs.size()) +
                               " samples; using the pooled coefficients");
      continue;
    }
    model.per_station[st] = fit_emos_pool(c.mean, c.sd, c.obs);
    if (!model.per_station[st].converged) {
      model.warnings.push_back("station " + train.stations[st].id +
                               " fit stopped before gradient tolerance");
    }
  }
  return model;
}

GaussianForecast predict_emos(const EmosCoefficients& k, double x_mean, double x_sd) {
  // The affine scale link may go nonpositive; the model clamps at the floor.
  return GaussianForecast{k.a + k.b * x_mean,
                          std::max(k.c + k.d * x_sd, kSigmaFloor)};
}

GaussianForecast predict_emos(const EmosModel& model, std::size_t station_index,
                              double x_mean, double x_sd) {
  if (model.scope == EmosScope::global) {
    return predict_emos(model.global, x_mean, x_sd);
  }
  if (station_index >= model.per_station.size()) {
    throw UnknownStationError("predict_emos: station index out of range");
  }
  return predict_emos(model.per_station[station_index], x_mean, x_sd);
}

GaussianForecast predict_emos(const EmosModel& model, const Sample& sample) {
  return predict_emos(model, static_cast<std::size_t>(sample.station_index),
                      sample.predictors[model.mean_index],
                      sample.predictors[model.sd_index]);
}

}  // namespace epp
