#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epp/scoring.hpp"

namespace epp {

struct HistogramResult {
  enum class Kind { rank, pit };
  Kind kind = Kind::rank;
  std::vector<long> counts;  // size = bins, sums to n
  std::size_t n = 0;

  int bins() const { return static_cast<int>(counts.size()); }
  // Goodness-of-fit statistic against the uniform histogram.
  double chi_square() const;
};

// Rank of each observation among the pooled {members, y}; ties broken
// uniformly at random from the seed. Bins 1..m+1.
HistogramResult rank_histogram(const std::vector<std::vector<double>>& ensembles,
                               const std::vector<double>& observations, std::uint64_t seed);

// Probability integral transform Phi((y-mu)/sigma) binned into `bins` equal
// cells (default matches the reporting convention, 20).
HistogramResult pit_histogram(const std::vector<GaussianForecast>& forecasts,
                              const std::vector<double>& observations, int bins = 20);

// mean(spread) / RMSE(mean - obs).
double spread_error_ratio(const std::vector<double>& spreads, const std::vector<double>& means,
                          const std::vector<double>& observations);

// Day-ordered per-station score series; the common shape across models is
// what makes pairwise testing well-defined.
struct PerStationScores {
  std::vector<std::vector<double>> scores;  // [station][day]
};

struct StationMeanResult {
  std::vector<double> per_station;
  double overall = 0.0;  // sample-weighted, not station-weighted
};
StationMeanResult mean_crps_by_station(const PerStationScores& s);

// Diebold-Mariano test on one station's aligned daily score series.
//   t_n = sqrt(n) * mean(d) / sigma_hat,  d_t = s1_t - s2_t,
//   sigma_hat^2 = sum_{|h|<k} autocov(d, h)   (clipped at 1e-12 from below).
// One-sided p-value Phi(t_n) for "series 1 better". A constant non-zero
// difference is uniform evidence: t_n = +-inf, p in {0,1}. An identically
// zero difference throws DegenerateVarianceError (incomparable).
struct DmTestResult {
  double t = 0.0;
  double sigma_hat = 0.0;
  int n = 0;
  int lag = 2;
  double p_value = 0.5;
};
DmTestResult dm_test(const std::vector<double>& scores1, const std::vector<double>& scores2,
                     int k = 2);

// Benjamini-Hochberg step-up rule at level alpha.
struct BhResult {
  double alpha = 0.05;
  double threshold = 0.0;        // p*, one of the inputs or 0
  std::vector<bool> rejected;    // per input position
  std::vector<double> sorted_p;  // ascending

  int n_rejected() const {
    int n = 0;
    for (bool r : rejected) n += r ? 1 : 0;
    return n;
  }
};
BhResult bh_procedure(const std::vector<double>& p_values, double alpha);

// Entry (i,j): percentage of stations where the one-sided DM test rejects in
// favor of model i over model j after BH correction at `alpha`. Stations with
// incomparable (identical) or too-short series count as non-rejections.
std::vector<std::vector<double>> pairwise_significance_matrix(
    const std::vector<PerStationScores>& models, double alpha = 0.05, int lag = 2);

}  // namespace epp
