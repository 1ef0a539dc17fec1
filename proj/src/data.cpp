#include "epp/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "epp/errors.hpp"
#include "epp/rng.hpp"
#include "epp/textio.hpp"

namespace epp {

// ---------------------------------------------------------------------------
// FeatureSpec

const std::vector<std::string>& FeatureSpec::variable_names() {
  static const std::vector<std::string> kVars = {
      "t2m",     "cape",    "sp",      "tcc",     "sshf",    "slhf",
      "u10",     "v10",     "d2m",     "ssr",     "str",     "sm",
      "v_pl500", "u_pl500", "u_pl850", "v_pl850", "gh_pl500", "q_pl850"};
  return kVars;
}

const std::vector<std::string>& FeatureSpec::station_feature_names() {
  static const std::vector<std::string> kStation = {"station_alt", "orog", "station_lat",
                                                    "station_lon"};
  return kStation;
}

FeatureSpec FeatureSpec::full() {
  FeatureSpec spec;
  for (const auto& v : variable_names()) {
    spec.names.push_back(v + "_mean");
    spec.names.push_back(v + "_std");
  }
  for (const auto& s : station_feature_names()) spec.names.push_back(s);
  return spec;
}

FeatureSpec FeatureSpec::t2m_only() {
  FeatureSpec spec;
  spec.names = {"t2m_mean", "t2m_std"};
  return spec;
}

int FeatureSpec::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> FeatureSpec::station_feature_indices() const {
  std::vector<int> idx;
  for (const auto& s : station_feature_names()) {
    const int i = index_of(s);
    if (i >= 0) idx.push_back(i);
  }
  return idx;
}

int ForecastDataset::station_index_of(const std::string& id) const {
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "na" || s == "nan" || s == "NaN" || s == "NAN";
}

// Cell semantics: empty/NA/nan marks a missing value (row gets dropped);
// anything else that fails numeric parsing is a hard error.
bool parse_cell(std::string_view s, double& out, bool& missing) {
  if (is_missing_token(s)) {
    missing = true;
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (!try_parse_double(s, out)) return false;
  if (!std::isfinite(out)) missing = true;
  return true;
}

FeatureSpec infer_spec_from_header(const std::vector<std::string>& header) {
  // Summaries in header order of their _mean column, station descriptors last,
  // matching the canonical FeatureSpec layout.
  FeatureSpec spec;
  const auto& station_names = FeatureSpec::station_feature_names();
  std::set<std::string> header_set(header.begin(), header.end());
  for (const auto& col : header) {
    if (col.size() > 5 && col.substr(col.size() - 5) == "_mean") {
      const std::string var = col.substr(0, col.size() - 5);
      if (header_set.count(var + "_std")) {
        spec.names.push_back(var + "_mean");
        spec.names.push_back(var + "_std");
      }
    }
  }
  for (const auto& s : station_names) {
    if (header_set.count(s)) spec.names.push_back(s);
  }
  return spec;
}

}  // namespace

LoadResult load_csv(const std::string& path, const FeatureSpec& spec) {
  const std::string text = read_file(path);
  if (text.empty()) throw EmptyDatasetError(path + " is empty");

  // Header.
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos) pos = text.size();
  std::string header_line(text.substr(0, pos));
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
  std::vector<std::string> header;
  for (auto sv : split_line(header_line)) header.emplace_back(sv);

  std::unordered_map<std::string, int> col_of;
  for (std::size_t i = 0; i < header.size(); ++i) col_of[header[i]] = static_cast<int>(i);

  auto require_col = [&](const std::string& name) {
    auto it = col_of.find(name);
    if (it == col_of.end()) throw MissingColumnError(name);
    return it->second;
  };

  const int c_station = require_col("station_id");
  const int c_time = require_col("valid_time");
  const int c_obs = require_col("obs");
  std::vector<int> feature_cols;
  for (const auto& f : spec.names) feature_cols.push_back(require_col(f));

  // Optional raw-member columns t2m_m1..t2m_m{m}: must form a dense 1..m run.
  std::vector<int> member_cols;
  for (int k = 1;; ++k) {
    auto it = col_of.find("t2m_m" + std::to_string(k));
    if (it == col_of.end()) break;
    member_cols.push_back(it->second);
  }

  // Station descriptor columns feed the station table when present.
  const auto& st_names = FeatureSpec::station_feature_names();
  std::vector<int> st_cols(4, -1);
  for (int i = 0; i < 4; ++i) {
    auto it = col_of.find(st_names[i]);
    if (it != col_of.end()) st_cols[i] = it->second;
  }

  LoadResult result;
  result.data.features = spec;
  result.data.member_count = static_cast<int>(member_cols.size());
  std::unordered_map<std::string, int> station_index;

  long line_no = 1;
  std::size_t line_start = pos + 1;
  const std::size_t n_cols = header.size();
  while (line_start < text.size()) {
    ++line_no;
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::string_view line(text.data() + line_start, line_end - line_start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line_start = line_end + 1;
    if (line.empty()) continue;

    const auto cells = split_line(line);
    if (cells.size() != n_cols) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(n_cols) + " columns, found " +
                           std::to_string(cells.size()));
    }

    Sample s;
    const std::string id(cells[c_station]);
    s.valid_time = parse_date(std::string(cells[c_time]));

    bool missing = false;
    double obs = 0.0;
    if (!parse_cell(cells[c_obs], obs, missing)) {
      throw ParseError(path, line_no, "bad obs value");
    }
    s.obs = obs;

    s.predictors.resize(spec.names.size());
    for (std::size_t i = 0; i < feature_cols.size(); ++i) {
      if (!parse_cell(cells[feature_cols[i]], s.predictors[i], missing)) {
        throw ParseError(path, line_no, "bad value in column " + spec.names[i]);
      }
    }
    s.members.resize(member_cols.size());
    for (std::size_t i = 0; i < member_cols.size(); ++i) {
      if (!parse_cell(cells[member_cols[i]], s.members[i], missing)) {
        throw ParseError(path, line_no, "bad member value");
      }
    }
    if (missing) {
      ++result.dropped_rows;
      continue;
    }

    auto it = station_index.find(id);
    if (it == station_index.end()) {
      Station st;
      st.id = id;
      auto cell_or_zero = [&](int col) {
        if (col < 0) return 0.0;
        double v = 0.0;
        bool miss = false;
        if (!parse_cell(cells[col], v, miss) || miss) return 0.0;
        return v;
      };
      st.alt = cell_or_zero(st_cols[0]);
      st.orog = cell_or_zero(st_cols[1]);
      st.lat = cell_or_zero(st_cols[2]);
      st.lon = cell_or_zero(st_cols[3]);
      it = station_index.emplace(id, static_cast<int>(result.data.stations.size())).first;
      result.data.stations.push_back(st);
    }
    s.station_index = it->second;
    result.data.samples.push_back(std::move(s));
  }

  if (result.data.samples.empty()) {
    throw EmptyDatasetError(path + " contains no usable rows");
  }
  return result;
}

LoadResult load_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos) pos = text.size();
  std::string header_line(text.substr(0, pos));
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
  std::vector<std::string> header;
  for (auto sv : split_line(header_line)) header.emplace_back(sv);
  const FeatureSpec spec = infer_spec_from_header(header);
  if (spec.names.empty()) {
    throw MissingColumnError("no <var>_mean/<var>_std predictor columns found");
  }
  return load_csv(path, spec);
}

void write_csv(const std::string& path, const ForecastDataset& data) {
  const auto& st_names = FeatureSpec::station_feature_names();
  const auto st_idx_in_spec = data.features.station_feature_indices();

  // Station descriptor columns are always emitted (from the station table);
  // spec entries for them are not duplicated in the summary block.
  std::vector<int> summary_features;
  for (std::size_t i = 0; i < data.features.names.size(); ++i) {
    const bool is_station =
        std::find(st_names.begin(), st_names.end(), data.features.names[i]) != st_names.end();
    if (!is_station) summary_features.push_back(static_cast<int>(i));
  }

  std::string out;
  out.reserve(data.samples.size() * 64 + 256);
  out += "station_id,valid_time,obs";
  for (const auto& s : st_names) {
    out += ',';
    out += s;
  }
  for (int fi : summary_features) {
    out += ',';
    out += data.features.names[fi];
  }
  for (int k = 1; k <= data.member_count; ++k) {
    out += ",t2m_m" + std::to_string(k);
  }
  out += '\n';

  for (const auto& s : data.samples) {
    const Station& st = data.stations[s.station_index];
    out += st.id;
    out += ',';
    out += format_date(s.valid_time);
    out += ',';
    out += format_double(s.obs);
    out += ',';
    out += format_double(st.alt);
    out += ',';
    out += format_double(st.orog);
    out += ',';
    out += format_double(st.lat);
    out += ',';
    out += format_double(st.lon);
    for (int fi : summary_features) {
      out += ',';
      out += format_double(s.predictors[fi]);
    }
    for (int k = 0; k < data.member_count; ++k) {
      out += ',';
      out += format_double(s.members[k]);
    }
    out += '\n';
  }
  (void)st_idx_in_spec;
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Splitting

SplitResult split_by_period(const ForecastDataset& data, const DateRange& train_range,
                            const DateRange& valid_range) {
  if (train_range.overlaps(valid_range)) {
    throw OverlappingRangesError(format_date(train_range.start) + ".." +
                                 format_date(train_range.end) + " vs " +
                                 format_date(valid_range.start) + ".." +
                                 format_date(valid_range.end));
  }
  SplitResult out;
  out.train.features = data.features;
  out.train.stations = data.stations;
  out.train.member_count = data.member_count;
  out.valid.features = data.features;
  out.valid.stations = data.stations;
  out.valid.member_count = data.member_count;
  for (const auto& s : data.samples) {
    if (train_range.contains(s.valid_time)) {
      out.train.samples.push_back(s);
    } else if (valid_range.contains(s.valid_time)) {
      out.valid.samples.push_back(s);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Standardization

StandardizationStats fit_standardization(const ForecastDataset& train,
                                         const std::vector<int>& exempt) {
  if (train.samples.empty()) throw EmptyDatasetError("standardization fit");
  const std::size_t p = train.features.count();
  StandardizationStats stats;
  stats.mean.assign(p, 0.0);
  stats.sd.assign(p, 1.0);
  stats.exempt = exempt;
  const double n = static_cast<double>(train.samples.size());
  for (const auto& s : train.samples) {
    for (std::size_t j = 0; j < p; ++j) stats.mean[j] += s.predictors[j];
  }
  for (std::size_t j = 0; j < p; ++j) stats.mean[j] /= n;
  std::vector<double> ss(p, 0.0);
  for (const auto& s : train.samples) {
    for (std::size_t j = 0; j < p; ++j) {
      const double d = s.predictors[j] - stats.mean[j];
      ss[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    const double sd = std::sqrt(ss[j] / n);  // population sd, divisor N
    stats.sd[j] = sd < 1e-8 ? 1.0 : sd;
  }
  for (int e : exempt) {
    if (e < 0 || static_cast<std::size_t>(e) >= p) {
      throw DimensionMismatchError("exempt index out of range");
    }
    stats.mean[e] = 0.0;
    stats.sd[e] = 1.0;
  }
  return stats;
}

std::vector<double> apply_standardization(const std::vector<double>& predictors,
                                          const StandardizationStats& stats) {
  if (predictors.size() != stats.mean.size()) {
    throw DimensionMismatchError("predictor vector vs standardization stats");
  }
  std::vector<double> out(predictors.size());
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    out[j] = (predictors[j] - stats.mean[j]) / stats.sd[j];
  }
  return out;
}

std::vector<double> invert_standardization(const std::vector<double>& standardized,
                                           const StandardizationStats& stats) {
  if (standardized.size() != stats.mean.size()) {
    throw DimensionMismatchError("predictor vector vs standardization stats");
  }
  std::vector<double> out(standardized.size());
  for (std::size_t j = 0; j < standardized.size(); ++j) {
    out[j] = standardized[j] * stats.sd[j] + stats.mean[j];
  }
  return out;
}

ForecastDataset apply_standardization(const ForecastDataset& data,
                                      const StandardizationStats& stats) {
  ForecastDataset out = data;
  for (auto& s : out.samples) {
    if (s.predictors.size() != stats.mean.size()) {
      throw DimensionMismatchError("dataset features vs standardization stats");
    }
    for (std::size_t j = 0; j < s.predictors.size(); ++j) {
      s.predictors[j] = (s.predictors[j] - stats.mean[j]) / stats.sd[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic archive
//
// Recipe (all draws from streams forked off cfg.seed; order is fixed and part
// of the format):
//   stream 1, per station s:  alt ~ U(0,1500), orog = alt + N(0,60) (>=0),
//                             lat ~ U(47.5,54.5), lon ~ U(6,15),
//                             b_s ~ N(0, station_bias_scale^2)
//   stream 2, per day t:      synoptic AR(1) w_t = 0.75 w_{t-1} + e_t with
//                             stationary sd 2.2; seasonal cycle
//                             seas_t = cos(2*pi*(doy-200)/365.25)
//   stream 3, per (s,t) row (station-major):
//       local ~ N(0,1.2); spread multiplier u = exp(0.35 z - 0.35^2/2);
//       latent drivers g1,g2,g3 ~ N(0,1); obs noise e0 ~ N(0,1);
//       m member noises for t2m; then per auxiliary variable: its latent
//       noise eta and m member noises.
//
//   truth  = 10 + 9*seas - 5.5*alt/1000 + w_t + local
//   obs    = truth + noise_scale * u * e0
//   t2m_i  = truth + bias_amplitude*(0.7 g1 + 0.5 g2 + 0.5)
//                  + nonlinearity_amplitude * (g3^2-1)/sqrt(2) * (alt-750)/750
//                  + b_s + underdispersion * noise_scale * u * e_i
//
// Members and the verifying observation share the day's spread multiplier u,
// so with underdispersion = 1 and all amplitudes zero they are exchangeable
// and the raw rank histogram is exactly uniform in expectation. The linear
// bias rides on latents observable through ssr/q_pl850 summaries; the
// nonlinear term pairs a station descriptor with the tcc latent so only
// nonlinear station-aware models can remove it. Every auxiliary variable is a
// fixed affine mix of (seas, w, local, g1, g2, g3, own noise), ensembled with
// member noise 0.35 in latent units.

namespace {

struct VarMix {
  const char* name;
  double seas, w, loc, g1, g2, g3, eta;  // latent mixture weights
  double scale, offset;                  // affine map to physical-ish units
};

// t2m is generated directly from the member recipe and is not in this table.
constexpr VarMix kAuxMixes[] = {
    {"cape", 0.5, 0.3, 0.5, 0.0, 0.0, 0.0, 0.6, 300.0, 150.0},
    {"sp", 0.1, -0.6, -0.2, 0.0, 0.0, 0.0, 0.5, 800.0, 101300.0},
    {"tcc", -0.3, 0.1, 0.0, 0.0, 0.0, 1.0, 0.2, 0.35, 0.5},
    {"sshf", 0.4, 0.1, 0.4, 0.0, 0.0, 0.0, 0.7, 40.0, -30.0},
    {"slhf", 0.5, 0.0, 0.3, 0.0, 0.0, 0.0, 0.7, 50.0, -60.0},
    {"u10", -0.2, 0.7, 0.2, 0.0, 0.0, 0.0, 0.6, 3.0, 1.0},
    {"v10", 0.0, 0.5, 0.3, 0.0, 0.0, 0.0, 0.8, 2.5, 0.5},
    {"d2m", 0.8, 0.4, 0.3, 0.0, 0.0, 0.0, 0.3, 6.0, 6.0},
    {"ssr", 0.6, 0.0, 0.1, 1.0, 0.0, 0.0, 0.3, 120.0, 160.0},
    {"str", 0.3, -0.2, 0.0, 0.0, 0.0, -0.3, 0.5, 25.0, -55.0},
    {"sm", -0.4, 0.1, 0.2, 0.0, 0.2, 0.0, 0.6, 0.08, 0.25},
    {"v_pl500", 0.0, 0.6, 0.1, 0.0, 0.0, 0.0, 0.8, 4.0, 0.0},
    {"u_pl500", 0.2, 0.8, 0.0, 0.0, 0.0, 0.0, 0.6, 5.0, 8.0},
    {"u_pl850", 0.1, 0.7, 0.1, 0.0, 0.0, 0.0, 0.6, 4.0, 4.0},
    {"v_pl850", 0.0, 0.6, 0.2, 0.0, 0.0, 0.0, 0.7, 3.5, 0.0},
    {"gh_pl500", 0.7, 0.5, 0.0, 0.0, 0.0, 0.0, 0.4, 60.0, 5600.0},
    {"q_pl850", 0.5, 0.0, 0.2, 0.0, 1.0, 0.0, 0.3, 0.0012, 0.005},
};

int day_of_year(const Date& d) {
  return static_cast<int>(days_from_civil(d) - days_from_civil(Date{d.year, 1, 1})) + 1;
}

void summarize(const std::vector<double>& members, double& mean, double& sd) {
  const double m = static_cast<double>(members.size());
  double s1 = 0.0;
  for (double v : members) s1 += v;
  mean = s1 / m;
  double s2 = 0.0;
  for (double v : members) s2 += (v - mean) * (v - mean);
  sd = std::sqrt(s2 / m);  // population sd, divisor m
}

}  // namespace

ForecastDataset generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.stations < 1 || cfg.days < 1 || cfg.members < 2) {
    throw UsageError("synthetic config needs stations >= 1, days >= 1, members >= 2");
  }
  if (!(cfg.underdispersion > 0.0) || cfg.underdispersion > 1.0) {
    throw UsageError("underdispersion must lie in (0, 1]");
  }
  if (cfg.bias_amplitude < 0 || cfg.nonlinearity_amplitude < 0 || cfg.station_bias_scale < 0 ||
      cfg.noise_scale < 0) {
    throw UsageError("amplitudes must be non-negative");
  }

  const Rng root(cfg.seed);
  Rng rng_station = root.fork(1);
  Rng rng_day = root.fork(2);
  Rng rng_panel = root.fork(3);

  ForecastDataset ds;
  ds.features = FeatureSpec::full();
  ds.member_count = cfg.members;

  std::vector<double> station_bias(cfg.stations);
  for (int s = 0; s < cfg.stations; ++s) {
    Station st;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%03d", s + 1);
    st.id = buf;
    st.alt = rng_station.uniform(0.0, 1500.0);
    st.orog = std::max(0.0, st.alt + rng_station.normal(0.0, 60.0));
    st.lat = rng_station.uniform(47.5, 54.5);
    st.lon = rng_station.uniform(6.0, 15.0);
    ds.stations.push_back(st);
    station_bias[s] = rng_station.normal(0.0, cfg.station_bias_scale);
  }

  // Day-level fields.
  std::vector<double> synoptic(cfg.days), seasonal(cfg.days);
  std::vector<Date> dates(cfg.days);
  const double rho = 0.75, w_sd = 2.2;
  for (int t = 0; t < cfg.days; ++t) {
    dates[t] = add_days(cfg.start_date, t);
    seasonal[t] = std::cos(2.0 * M_PI * (day_of_year(dates[t]) - 200) / 365.25);
    if (t == 0) {
      synoptic[t] = rng_day.normal(0.0, w_sd);
    } else {
      synoptic[t] = rho * synoptic[t - 1] + rng_day.normal(0.0, w_sd * std::sqrt(1.0 - rho * rho));
    }
  }

  const FeatureSpec& spec = ds.features;
  const int i_t2m_mean = spec.index_of("t2m_mean");
  const int i_t2m_std = spec.index_of("t2m_std");
  const int i_alt = spec.index_of("station_alt");
  const int i_orog = spec.index_of("orog");
  const int i_lat = spec.index_of("station_lat");
  const int i_lon = spec.index_of("station_lon");
  constexpr int kAuxCount = static_cast<int>(std::size(kAuxMixes));
  std::vector<int> aux_mean_idx(kAuxCount), aux_std_idx(kAuxCount);
  for (int v = 0; v < kAuxCount; ++v) {
    aux_mean_idx[v] = spec.index_of(std::string(kAuxMixes[v].name) + "_mean");
    aux_std_idx[v] = spec.index_of(std::string(kAuxMixes[v].name) + "_std");
  }

  ds.samples.reserve(static_cast<std::size_t>(cfg.stations) * cfg.days);
  std::vector<double> aux_members(cfg.members);
  for (int s = 0; s < cfg.stations; ++s) {
    const Station& st = ds.stations[s];
    const double z_alt = (st.alt - 750.0) / 750.0;
    for (int t = 0; t < cfg.days; ++t) {
      const double local = rng_panel.normal(0.0, 1.2);
      const double u = std::exp(0.35 * rng_panel.normal() - 0.35 * 0.35 / 2.0);
      const double g1 = rng_panel.normal();
      const double g2 = rng_panel.normal();
      const double g3 = rng_panel.normal();
      const double truth =
          10.0 + 9.0 * seasonal[t] - 5.5 * st.alt / 1000.0 + synoptic[t] + local;

      Sample smp;
      smp.station_index = s;
      smp.valid_time = dates[t];
      smp.obs = truth + cfg.noise_scale * u * rng_panel.normal();
      smp.predictors.assign(spec.count(), 0.0);

      const double fc_bias = cfg.bias_amplitude * (0.7 * g1 + 0.5 * g2 + 0.5) +
                             cfg.nonlinearity_amplitude * (g3 * g3 - 1.0) * M_SQRT1_2 * z_alt +
                             station_bias[s];
      smp.members.resize(cfg.members);
      for (int i = 0; i < cfg.members; ++i) {
        smp.members[i] =
            truth + fc_bias + cfg.underdispersion * cfg.noise_scale * u * rng_panel.normal();
      }
      double mean = 0.0, sd = 0.0;
      summarize(smp.members, mean, sd);
      smp.predictors[i_t2m_mean] = mean;
      smp.predictors[i_t2m_std] = sd;

      const double w_norm = synoptic[t] / w_sd;
      const double loc_norm = local / 1.2;
      for (int v = 0; v < kAuxCount; ++v) {
        const VarMix& mix = kAuxMixes[v];
        const double latent = mix.seas * seasonal[t] + mix.w * w_norm + mix.loc * loc_norm +
                              mix.g1 * g1 + mix.g2 * g2 + mix.g3 * g3 +
                              mix.eta * rng_panel.normal();
        for (int i = 0; i < cfg.members; ++i) {
          aux_members[i] = mix.scale * (latent + 0.35 * rng_panel.normal()) + mix.offset;
        }
        summarize(aux_members, mean, sd);
        smp.predictors[aux_mean_idx[v]] = mean;
        smp.predictors[aux_std_idx[v]] = sd;
      }

      smp.predictors[i_alt] = st.alt;
      smp.predictors[i_orog] = st.orog;
      smp.predictors[i_lat] = st.lat;
      smp.predictors[i_lon] = st.lon;
      ds.samples.push_back(std::move(smp));
    }
  }
  return ds;
}

}  // namespace epp
