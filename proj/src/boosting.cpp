#include "epp/boosting.hpp"

#include <algorithm>
#include <cmath>

#include "epp/errors.hpp"

namespace epp {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056;

double clamp_ls(double ls) {
  return std::clamp(ls, -kBoostLogSigmaBound, kBoostLogSigmaBound);
}

struct FitState {
  std::vector<double> mu;  // per sample, current mean link
  std::vector<double> ls;  // per sample, raw log-sigma link (clamped at use)

  double log_lik(const std::vector<double>& obs) const {
    double ll = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const double l = clamp_ls(ls[i]);
      const double z = (obs[i] - mu[i]) * std::exp(-l);
      ll += -l - 0.5 * z * z - kLogSqrt2Pi;
    }
    if (!std::isfinite(ll)) {
      throw NonFiniteLikelihoodError("boosting: likelihood not finite");
    }
    return ll;
  }
};

struct ColumnMoments {
  std::vector<double> mean, sd;
};

ColumnMoments station_moments(const std::vector<std::vector<double>>& cols) {
  ColumnMoments m;
  const std::size_t n = cols.empty() ? 0 : cols[0].size();
  for (const auto& c : cols) {
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    m.mean.push_back(mean);
    m.sd.push_back(std::sqrt(ss / static_cast<double>(n)));
  }
  return m;
}

}  // namespace

double boost_mean_log_score(const BoostCoefficients& k,
                            const std::vector<std::vector<double>>& columns,
                            const std::vector<double>& obs) {
  const std::size_t n = obs.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double mu = k.beta[0];
    double ls = k.gamma[0];
    for (std::size_t j = 0; j < columns.size(); ++j) {
      mu += k.beta[j + 1] * columns[j][i];
      ls += k.gamma[j + 1] * columns[j][i];
    }
    const double l = clamp_ls(ls);
    const double z = (obs[i] - mu) * std::exp(-l);
    total += l + 0.5 * z * z + kLogSqrt2Pi;
  }
  return total / static_cast<double>(n);
}

BoostCoefficients fit_boost_station(const std::vector<std::vector<double>>& columns,
                                    const std::vector<double>& obs,
                                    const BoostOptions& options) {
  const std::size_t q = columns.size();
  const std::size_t n = obs.size();
  if (n < static_cast<std::size_t>(kBoostMinStationSamples)) {
    throw TooFewSamplesError("boosting: station needs >= " +
                             std::to_string(kBoostMinStationSamples) +
                             " samples, got " + std::to_string(n));
  }
  for (const auto& c : columns) {
    if (c.size() != n) throw DimensionMismatchError("boosting: ragged column");
  }
  if (options.step <= 0.0 || options.max_iter < 0) {
    throw UsageError("boosting: step must be positive, max_iter non-negative");
  }

  BoostCoefficients k;
  k.beta.assign(q + 1, 0.0);
  k.gamma.assign(q + 1, 0.0);

  FitState st;
  st.mu.assign(n, 0.0);
  st.ls.assign(n, 0.0);

  const ColumnMoments mom = station_moments(columns);
  const double inv_n = 1.0 / static_cast<double>(n);

  double aic_prev = -2.0 * st.log_lik(obs) + 2.0 * k.nonzero_count();

  std::vector<double> g_mu(n), g_ls(n);
  for (int t = 1; t <= options.max_iter; ++t) {
    // Snapshot for atomic accept/reject of the whole iteration.
    const BoostCoefficients k_before = k;
    const FitState st_before = st;

    // Periodic closed-form intercept refit so the selected coordinates do not
    // starve the baselines: exact one-dimensional likelihood maximizers.
    if ((t - 1) % 10 == 0) {
      double wsum = 0.0, wr = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(-2.0 * clamp_ls(st.ls[i]));
        wsum += w;
        wr += w * (obs[i] - st.mu[i]);
      }
      const double dmu = wr / wsum;
      k.beta[0] += dmu;
      for (auto& m : st.mu) m += dmu;

      double zz = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double z = (obs[i] - st.mu[i]) * std::exp(-clamp_ls(st.ls[i]));
        zz += z * z;
      }
      const double dls = 0.5 * std::log(zz * inv_n);
      if (std::isfinite(dls)) {
        k.gamma[0] += dls;
        for (auto& l : st.ls) l += dls;
      }
    }

    // Score gradients per sample, with respect to mu and log sigma.
    for (std::size_t i = 0; i < n; ++i) {
      const double l = clamp_ls(st.ls[i]);
      const double inv_s = std::exp(-l);
      const double z = (obs[i] - st.mu[i]) * inv_s;
      g_mu[i] = -z * inv_s;
      // Zero subgradient where the link is pegged at the bound.
      g_ls[i] = (st.ls[i] == l) ? (1.0 - z * z) : 0.0;
    }
    double gmu_mean = 0.0, gls_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gmu_mean += g_mu[i];
      gls_mean += g_ls[i];
    }
    gmu_mean *= inv_n;
    gls_mean *= inv_n;
    double gmu_sd = 0.0, gls_sd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gmu_sd += (g_mu[i] - gmu_mean) * (g_mu[i] - gmu_mean);
      gls_sd += (g_ls[i] - gls_mean) * (g_ls[i] - gls_mean);
    }
    gmu_sd = std::sqrt(gmu_sd * inv_n);
    gls_sd = std::sqrt(gls_sd * inv_n);

    // Candidate with the largest |Pearson corr(column, -gradient)| wins; mean
    // candidates outrank scale candidates on exact ties, lower index first.
    int best_j = -1;
    bool best_is_mu = true;
    double best_abs = 0.0, best_slope = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      if (mom.sd[j] == 0.0) continue;
      double dot_mu = 0.0, dot_ls = 0.0;
      const auto& col = columns[j];
      for (std::size_t i = 0; i < n; ++i) {
        dot_mu += col[i] * g_mu[i];
        dot_ls += col[i] * g_ls[i];
      }
      if (gmu_sd > 0.0) {
        const double cov = dot_mu * inv_n - mom.mean[j] * gmu_mean;
        const double corr = std::abs(cov / (mom.sd[j] * gmu_sd));
        if (corr > best_abs) {
          best_abs = corr;
          best_j = static_cast<int>(j);
          best_is_mu = true;
          best_slope = -cov / (mom.sd[j] * mom.sd[j]);
        }
      }
      if (gls_sd > 0.0) {
        const double cov = dot_ls * inv_n - mom.mean[j] * gls_mean;
        const double corr = std::abs(cov / (mom.sd[j] * gls_sd));
        if (corr > best_abs) {
          best_abs = corr;
          best_j = static_cast<int>(j);
          best_is_mu = false;
          best_slope = -cov / (mom.sd[j] * mom.sd[j]);
        }
      }
    }
    if (best_j < 0 || best_slope == 0.0) {
      k = k_before;
      st = st_before;
      break;
    }

    // Shrunken base-learner update: `step` times the least-squares fit of the
    // negative gradient on the winning column. Spurious picks get steps near
    // zero and fall to the AIC guard; true signal converges geometrically.
    const double delta = options.step * best_slope;
    const auto& col = columns[static_cast<std::size_t>(best_j)];
    if (best_is_mu) {
      k.beta[static_cast<std::size_t>(best_j) + 1] += delta;
      for (std::size_t i = 0; i < n; ++i) st.mu[i] += delta * col[i];
    } else {
      k.gamma[static_cast<std::size_t>(best_j) + 1] += delta;
      for (std::size_t i = 0; i < n; ++i) st.ls[i] += delta * col[i];
    }

    const double aic = -2.0 * st.log_lik(obs) + 2.0 * k.nonzero_count();
    if (options.aic_stopping && aic >= aic_prev) {
      k = k_before;
      st = st_before;
      break;
    }
    aic_prev = aic;
    k.iterations_used = t;
  }
  return k;
}

BoostModel fit_emos_boost(const ForecastDataset& train, const BoostOptions& options) {
  if (train.samples.empty()) throw EmptyDatasetError("fit_emos_boost: no samples");

  BoostModel model;
  model.options = options;
  const std::vector<std::string> station_features = FeatureSpec::station_feature_names();
  for (std::size_t j = 0; j < train.features.count(); ++j) {
    const std::string& name = train.features.names[j];
    if (std::find(station_features.begin(), station_features.end(), name) !=
        station_features.end()) {
      continue;  // station descriptors carry no per-day signal for boosting
    }
    model.feature_names.push_back(name);
    model.feature_indices.push_back(static_cast<int>(j));
  }
  if (model.feature_names.empty()) {
    throw MissingColumnError("fit_emos_boost: no candidate predictors");
  }

  // Pooled training standardization over the candidate columns.
  const std::size_t q = model.feature_indices.size();
  model.feature_mean.assign(q, 0.0);
  model.feature_sd.assign(q, 1.0);
  const double inv_n = 1.0 / static_cast<double>(train.samples.size());
  for (std::size_t j = 0; j < q; ++j) {
    const int src = model.feature_indices[j];
    double mean = 0.0;
    for (const auto& s : train.samples) mean += s.predictors[src];
    mean *= inv_n;
    double ss = 0.0;
    for (const auto& s : train.samples) {
      const double d = s.predictors[src] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss * inv_n);
    model.feature_mean[j] = mean;
    model.feature_sd[j] = sd < 1e-8 ? 1.0 : sd;
  }

  const std::size_t n_st = train.stations.size();
  model.per_station.resize(n_st);
  for (std::size_t st = 0; st < n_st; ++st) {
    std::vector<std::vector<double>> cols(q);
    std::vector<double> obs;
    for (const auto& s : train.samples) {
      if (s.station_index != static_cast<int>(st)) continue;
      obs.push_back(s.obs);
      for (std::size_t j = 0; j < q; ++j) {
        const double raw = s.predictors[model.feature_indices[j]];
        cols[j].push_back((raw - model.feature_mean[j]) / model.feature_sd[j]);
      }
    }
    model.per_station[st] = fit_boost_station(cols, obs, options);
  }
  return model;
}

GaussianForecast predict_emos_boost(const BoostCoefficients& k,
                                    const std::vector<double>& x_standardized) {
  if (x_standardized.size() + 1 != k.beta.size()) {
    throw DimensionMismatchError("predict_emos_boost: predictor length mismatch");
  }
  double mu = k.beta[0];
  double ls = k.gamma[0];
  for (std::size_t j = 0; j < x_standardized.size(); ++j) {
    mu += k.beta[j + 1] * x_standardized[j];
    ls += k.gamma[j + 1] * x_standardized[j];
  }
  return GaussianForecast{mu, std::max(std::exp(clamp_ls(ls)), kSigmaFloor)};
}

GaussianForecast predict_emos_boost(const BoostModel& model, const Sample& sample) {
  const std::size_t st = static_cast<std::size_t>(sample.station_index);
  if (st >= model.per_station.size()) {
    throw UnknownStationError("predict_emos_boost: station index out of range");
  }
  std::vector<double> x(model.feature_indices.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = (sample.predictors[model.feature_indices[j]] - model.feature_mean[j]) /
           model.feature_sd[j];
  }
  return predict_emos_boost(model.per_station[st], x);
}

}  // namespace epp
