#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epp/dates.hpp"

namespace epp {

// Ordered predictor schema. Ensemble summary columns come first (variable
// order below), the four station descriptors last. Handed around by value;
// artifacts persist it so fitted models refuse mismatched inputs.
struct FeatureSpec {
  std::vector<std::string> names;

  // The 18 forecast variables, each contributing <var>_mean and <var>_std.
  static const std::vector<std::string>& variable_names();
  static const std::vector<std::string>& station_feature_names();

  // Full 40-predictor schema (18 variables x 2 summaries + 4 station features).
  static FeatureSpec full();
  // Temperature-only subset {t2m_mean, t2m_std}.
  static FeatureSpec t2m_only();

  std::size_t count() const { return names.size(); }
  // Index of a named predictor, or -1.
  int index_of(const std::string& name) const;
  // Indices of the station descriptors present in this spec.
  std::vector<int> station_feature_indices() const;

  bool operator==(const FeatureSpec& o) const { return names == o.names; }
};

struct Station {
  std::string id;
  double alt = 0.0;
  double orog = 0.0;
  double lat = 0.0;
  double lon = 0.0;
};

struct Sample {
  int station_index = -1;  // into ForecastDataset::stations
  Date valid_time;
  double obs = 0.0;
  std::vector<double> predictors;  // FeatureSpec order
  std::vector<double> members;     // raw t2m ensemble; empty when absent
};

struct ForecastDataset {
  FeatureSpec features;
  std::vector<Station> stations;
  std::vector<Sample> samples;
  int member_count = 0;  // 0 when member columns are absent

  std::size_t size() const { return samples.size(); }
  int station_index_of(const std::string& id) const;
};

// CSV layout:
//   station_id,valid_time,obs,station_alt,orog,station_lat,station_lon,
//   <var>_mean,<var>_std,...            (variables in FeatureSpec order)
//   [,t2m_m1..t2m_m{m}]                 (optional raw member columns)
// Columns are matched by header name; unknown extra columns are ignored on
// load and never produced on write. Missing spec columns raise
// MissingColumnError; malformed cells raise ParseError. Rows with a
// non-finite observation or predictor are dropped (counted in the return).
struct LoadResult {
  ForecastDataset data;
  std::size_t dropped_rows = 0;
};
LoadResult load_csv(const std::string& path, const FeatureSpec& spec);
LoadResult load_csv(const std::string& path);  // spec inferred from header

void write_csv(const std::string& path, const ForecastDataset& data);

// Partition by valid_time into two datasets (inclusive ranges). Ranges must
// not overlap; station tables are preserved in both halves.
struct SplitResult {
  ForecastDataset train;
  ForecastDataset valid;
};
SplitResult split_by_period(const ForecastDataset& data, const DateRange& train_range,
                            const DateRange& valid_range);

// Per-feature location/scale computed on a training set (population moments,
// divisor N). Features with sd below 1e-8 standardize with divisor 1 so
// constant columns pass through centered instead of exploding.
struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> sd;          // as used (degenerate columns recorded as 1)
  std::vector<int> exempt;         // feature indices left untouched

  bool empty() const { return mean.empty(); }
};

StandardizationStats fit_standardization(const ForecastDataset& train,
                                         const std::vector<int>& exempt = {});
ForecastDataset apply_standardization(const ForecastDataset& data,
                                      const StandardizationStats& stats);
std::vector<double> apply_standardization(const std::vector<double>& predictors,
                                          const StandardizationStats& stats);
std::vector<double> invert_standardization(const std::vector<double>& standardized,
                                           const StandardizationStats& stats);

// Synthetic ensemble archive generator. Deterministic given the seed; the
// full recipe is documented at the implementation.
struct SyntheticConfig {
  int stations = 60;
  int days = 730;
  int members = 10;
  std::uint64_t seed = 1;
  Date start_date{2014, 1, 1};
  double bias_amplitude = 1.0;          // linear aux-driven forecast bias
  double nonlinearity_amplitude = 1.2;  // station-x-aux interaction bias
  double station_bias_scale = 1.0;      // sd of per-station constant bias
  double underdispersion = 0.5;         // member spread / truth spread, in (0,1]
  double noise_scale = 1.0;             // sd of the unpredictable component
};

ForecastDataset generate_synthetic(const SyntheticConfig& cfg);

}  // namespace epp
