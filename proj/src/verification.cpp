#include "epp/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "epp/errors.hpp"
#include "epp/rng.hpp"

namespace epp {

double HistogramResult::chi_square() const {
  if (counts.empty() || n == 0) return 0.0;
  const double expected = static_cast<double>(n) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (long c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

HistogramResult rank_histogram(const std::vector<std::vector<double>>& ensembles,
                               const std::vector<double>& observations, std::uint64_t seed) {
  if (ensembles.size() != observations.size()) {
    throw DimensionMismatchError("ensembles vs observations");
  }
  if (ensembles.empty()) throw EmptyDatasetError("rank histogram");
  const std::size_t m = ensembles.front().size();
  if (m == 0) throw EmptyEnsembleError();

  HistogramResult h;
  h.kind = HistogramResult::Kind::rank;
  h.counts.assign(m + 1, 0);
  h.n = observations.size();
  Rng rng(seed);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& ens = ensembles[i];
    if (ens.size() != m) throw DimensionMismatchError("ragged ensemble member counts");
    const double y = observations[i];
    std::size_t below = 0, ties = 0;
    for (double x : ens) {
      if (x < y) ++below;
      else if (x == y) ++ties;
    }
    std::size_t rank = below + 1;
    if (ties > 0) rank += rng.index(ties + 1);  // uniform position among equals
    ++h.counts[rank - 1];
  }
  return h;
}

HistogramResult pit_histogram(const std::vector<GaussianForecast>& forecasts,
                              const std::vector<double>& observations, int bins) {
  if (forecasts.size() != observations.size()) {
    throw DimensionMismatchError("forecasts vs observations");
  }
  if (forecasts.empty()) throw EmptyDatasetError("PIT histogram");
  if (bins < 1) throw UsageError("PIT histogram needs at least one bin");

  HistogramResult h;
  h.kind = HistogramResult::Kind::pit;
  h.counts.assign(bins, 0);
  h.n = observations.size();
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& f = forecasts[i];
    const double pit = normal_cdf((observations[i] - f.mu) / f.sigma);
    int b = static_cast<int>(pit * bins);
    if (b >= bins) b = bins - 1;
    if (b < 0) b = 0;
    ++h.counts[b];
  }
  return h;
}

double spread_error_ratio(const std::vector<double>& spreads, const std::vector<double>& means,
                          const std::vector<double>& observations) {
  if (spreads.size() != means.size() || means.size() != observations.size()) {
    throw DimensionMismatchError("spread-error inputs");
  }
  if (spreads.empty()) throw EmptyDatasetError("spread-error ratio");
  double spread_sum = 0.0, sq_err = 0.0;
  for (std::size_t i = 0; i < spreads.size(); ++i) {
    spread_sum += spreads[i];
    const double e = means[i] - observations[i];
    sq_err += e * e;
  }
  const double rmse = std::sqrt(sq_err / static_cast<double>(spreads.size()));
  if (rmse == 0.0) throw ZeroErrorError();
  return spread_sum / static_cast<double>(spreads.size()) / rmse;
}

StationMeanResult mean_crps_by_station(const PerStationScores& s) {
  if (s.scores.empty()) throw EmptyDatasetError("per-station scores");
  StationMeanResult out;
  out.per_station.reserve(s.scores.size());
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& series : s.scores) {
    if (series.empty()) {
      out.per_station.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double sum = std::accumulate(series.begin(), series.end(), 0.0);
    out.per_station.push_back(sum / static_cast<double>(series.size()));
    total += sum;
    count += series.size();
  }
  if (count == 0) throw EmptyDatasetError("per-station scores: all series empty");
  out.overall = total / static_cast<double>(count);
  return out;
}

DmTestResult dm_test(const std::vector<double>& scores1, const std::vector<double>& scores2,
                     int k) {
  if (scores1.size() != scores2.size()) {
    throw DimensionMismatchError("score series lengths differ");
  }
  if (k < 1) throw UsageError("DM lag must be >= 1");
  const int n = static_cast<int>(scores1.size());
  if (n < 2 * k) {
    throw TooFewSamplesError("DM test needs n >= 2k");
  }

  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = scores1[i] - scores2[i];
  const double mean_d = std::accumulate(d.begin(), d.end(), 0.0) / n;

  auto autocov = [&](int h) {
    double acc = 0.0;
    for (int t = h; t < n; ++t) acc += (d[t] - mean_d) * (d[t - h] - mean_d);
    return acc / n;
  };

  DmTestResult r;
  r.n = n;
  r.lag = k;
  const double gamma0 = autocov(0);
  if (gamma0 == 0.0) {
    // All differences identical. Zero mean: the series carry no ordering
    // information. Non-zero mean: a uniform improvement, treated as an
    // unambiguous rejection in favor of the dominating side.
    if (mean_d == 0.0) throw DegenerateVarianceError();
    r.sigma_hat = 0.0;
    r.t = mean_d < 0 ? -std::numeric_limits<double>::infinity()
                     : std::numeric_limits<double>::infinity();
    r.p_value = mean_d < 0 ? 0.0 : 1.0;
    return r;
  }

  double var = gamma0;
  for (int h = 1; h < k; ++h) var += 2.0 * autocov(h);
  var = std::max(var, 1e-12);  // finite-sample estimator can dip negative
  r.sigma_hat = std::sqrt(var);
  r.t = std::sqrt(static_cast<double>(n)) * mean_d / r.sigma_hat;
  r.p_value = normal_cdf(r.t);
  return r;
}

BhResult bh_procedure(const std::vector<double>& p_values, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw UsageError("alpha must lie in (0,1)");
  if (p_values.empty()) throw EmptyDatasetError("no p-values");

  BhResult r;
  r.alpha = alpha;
  r.sorted_p = p_values;
  std::sort(r.sorted_p.begin(), r.sorted_p.end());
  const double s = static_cast<double>(p_values.size());
  r.threshold = 0.0;
  bool found = false;
  for (std::size_t i = r.sorted_p.size(); i > 0; --i) {
    if (r.sorted_p[i - 1] <= static_cast<double>(i) / s * alpha) {
      r.threshold = r.sorted_p[i - 1];
      found = true;
      break;
    }
  }
  r.rejected.resize(p_values.size());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    r.rejected[i] = found && p_values[i] <= r.threshold;
  }
  return r;
}

std::vector<std::vector<double>> pairwise_significance_matrix(
    const std::vector<PerStationScores>& models, double alpha, int lag) {
  const std::size_t m = models.size();
  if (m == 0) throw EmptyDatasetError("no models");
  const std::size_t n_stations = models.front().scores.size();
  for (const auto& model : models) {
    if (model.scores.size() != n_stations) {
      throw GridMismatchError("station counts differ between models");
    }
    for (std::size_t s = 0; s < n_stations; ++s) {
      if (model.scores[s].size() != models.front().scores[s].size()) {
        throw GridMismatchError("per-station day counts differ between models");
      }
    }
  }

  std::vector<std::vector<double>> out(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      std::vector<double> p(n_stations, 1.0);
      for (std::size_t s = 0; s < n_stations; ++s) {
        try {
          p[s] = dm_test(models[i].scores[s], models[j].scores[s], lag).p_value;
        } catch (const DegenerateVarianceError&) {
          p[s] = 1.0;  // incomparable station: never significant
        } catch (const TooFewSamplesError&) {
          p[s] = 1.0;  // too short to test: never significant
        }
      }
      const BhResult bh = bh_procedure(p, alpha);
      const long rejected = std::count(bh.rejected.begin(), bh.rejected.end(), true);
      out[i][j] = 100.0 * static_cast<double>(rejected) / static_cast<double>(n_stations);
    }
  }
  return out;
}

}  // namespace epp
