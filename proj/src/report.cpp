#include "epp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "epp/dates.hpp"
#include "epp/errors.hpp"
#include "epp/qrf.hpp"
#include "epp/scoring.hpp"
#include "epp/textio.hpp"

namespace epp {

namespace {

std::vector<std::string> dataset_station_ids(const ForecastDataset& ds) {
  std::vector<std::string> ids;
  ids.reserve(ds.stations.size());
  for (const auto& s : ds.stations) ids.push_back(s.id);
  return ids;
}

// Day-sorted sample indices per station; every station must be populated so
// that the per-station score series are well-defined.
std::vector<std::vector<std::size_t>> station_day_index(const ForecastDataset& ds) {
  std::vector<std::vector<std::size_t>> idx(ds.stations.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    idx[static_cast<std::size_t>(ds.samples[i].station_index)].push_back(i);
  }
  for (std::size_t st = 0; st < idx.size(); ++st) {
    if (idx[st].empty()) {
      throw GridMismatchError("station " + ds.stations[st].id +
                              " has no validation samples");
    }
    std::sort(idx[st].begin(), idx[st].end(), [&](std::size_t a, std::size_t b) {
      return days_from_civil(ds.samples[a].valid_time) <
             days_from_civil(ds.samples[b].valid_time);
    });
  }
  return idx;
}

double population_sd(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

ModelEvaluation evaluate_raw(const ForecastDataset& valid,
                             const std::vector<std::vector<std::size_t>>& grid,
                             std::uint64_t rank_seed) {
  ModelEvaluation ev;
  ev.name = "raw";
  const int im = valid.features.index_of("t2m_mean");
  const int is = valid.features.index_of("t2m_std");

  std::vector<std::vector<double>> ensembles;
  std::vector<double> obs, means, spreads;
  ev.scores.scores.resize(grid.size());
  for (std::size_t st = 0; st < grid.size(); ++st) {
    for (const std::size_t i : grid[st]) {
      const Sample& s = valid.samples[i];
      const double crps = crps_ensemble(s.members, s.obs);
      ev.scores.scores[st].push_back(crps);
      ensembles.push_back(s.members);
      obs.push_back(s.obs);
      if (im >= 0 && is >= 0) {
        means.push_back(s.predictors[static_cast<std::size_t>(im)]);
        spreads.push_back(s.predictors[static_cast<std::size_t>(is)]);
      } else {
        double m = 0.0;
        for (const double v : s.members) m += v;
        m /= static_cast<double>(s.members.size());
        means.push_back(m);
        spreads.push_back(population_sd(s.members, m));
      }
    }
  }
  ev.histogram = rank_histogram(ensembles, obs, rank_seed);
  ev.spread_error = spread_error_ratio(spreads, means, obs);
  return ev;
}

ModelEvaluation evaluate_one(const ModelArtifact& artifact, const std::string& name,
                             const ForecastDataset& valid,
                             const std::vector<std::vector<std::size_t>>& grid,
                             std::uint64_t rank_seed) {
  ModelEvaluation ev;
  ev.name = name;
  ev.wall_seconds = artifact.meta.wall_seconds;
  ev.scores.scores.resize(grid.size());

  if (artifact_is_quantile_family(artifact)) {
    const std::vector<double> levels = default_quantile_levels();
    std::vector<std::vector<double>> pseudo;
    std::vector<double> obs, means, spreads;
    for (std::size_t st = 0; st < grid.size(); ++st) {
      for (const std::size_t i : grid[st]) {
        const Sample& s = valid.samples[i];
        const QuantileForecast q = artifact_predict_quantiles(artifact, s, levels);
        ev.scores.scores[st].push_back(crps_quantile_approx(q, s.obs));
        double m = 0.0;
        for (const double v : q.values) m += v;
        m /= static_cast<double>(q.values.size());
        means.push_back(m);
        spreads.push_back(population_sd(q.values, m));
        pseudo.push_back(q.values);
        obs.push_back(s.obs);
      }
    }
    ev.histogram = rank_histogram(pseudo, obs, rank_seed);
    ev.spread_error = spread_error_ratio(spreads, means, obs);
  } else {
    std::vector<GaussianForecast> forecasts;
    std::vector<double> obs, means, spreads;
    for (std::size_t st = 0; st < grid.size(); ++st) {
      for (const std::size_t i : grid[st]) {
        const Sample& s = valid.samples[i];
        const GaussianForecast f = artifact_predict_gaussian(artifact, s);
        ev.scores.scores[st].push_back(crps_normal(f, s.obs));
        forecasts.push_back(f);
        obs.push_back(s.obs);
        means.push_back(f.mu);
        spreads.push_back(f.sigma);
      }
    }
    ev.histogram = pit_histogram(forecasts, obs);
    ev.spread_error = spread_error_ratio(spreads, means, obs);
  }
  return ev;
}

}  // namespace

EvaluationReport evaluate_artifacts(const std::vector<ModelArtifact>& artifacts,
                                    const ForecastDataset& valid,
                                    const std::vector<std::string>& references,
                                    double alpha, std::uint64_t rank_seed) {
  if (valid.samples.empty()) {
    throw EmptyDatasetError("evaluate: no validation samples");
  }
  if (artifacts.empty() && valid.member_count == 0) {
    throw UsageError("evaluate: nothing to score (no artifacts, no raw members)");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw UsageError("evaluate: alpha must lie strictly inside (0, 1)");
  }

  EvaluationReport report;
  report.alpha = alpha;
  report.station_ids = dataset_station_ids(valid);

  for (const auto& a : artifacts) {
    if (a.features.names != valid.features.names) {
      throw GridMismatchError("artifact for '" + a.family +
                              "' was fitted on a different feature spec");
    }
    if (!a.stations.empty() && a.stations != report.station_ids) {
      throw GridMismatchError("artifact for '" + a.family +
                              "' was fitted on a different station table");
    }
  }

  const auto grid = station_day_index(valid);

  if (valid.member_count > 0) {
    report.models.push_back(evaluate_raw(valid, grid, rank_seed));
  }
  for (const auto& a : artifacts) {
    std::string name = a.family;
    int copy = 1;
    while (std::any_of(report.models.begin(), report.models.end(),
                       [&](const ModelEvaluation& m) { return m.name == name; })) {
      name = a.family + "(" + std::to_string(++copy) + ")";
    }
    report.models.push_back(evaluate_one(a, name, valid, grid, rank_seed));
  }

  for (auto& m : report.models) {
    const StationMeanResult agg = mean_crps_by_station(m.scores);
    m.station_crps = agg.per_station;
    m.overall_crps = agg.overall;
  }

  // Best model per station (ties go to the earlier entry).
  report.best_station_tally.assign(report.models.size(), 0);
  for (std::size_t st = 0; st < report.station_ids.size(); ++st) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < report.models.size(); ++m) {
      if (report.models[m].station_crps[st] <
          report.models[best].station_crps[st]) {
        best = m;
      }
    }
    report.best_station_tally[best] += 1;
  }

  std::vector<PerStationScores> all_scores;
  all_scores.reserve(report.models.size());
  for (const auto& m : report.models) all_scores.push_back(m.scores);
  report.significance = pairwise_significance_matrix(all_scores, alpha);

  report.reference_names = references;
  for (const auto& ref : references) {
    const auto it = std::find_if(report.models.begin(), report.models.end(),
                                 [&](const ModelEvaluation& m) { return m.name == ref; });
    if (it == report.models.end()) {
      throw UsageError("evaluate: reference '" + ref +
                       "' is not among the evaluated models");
    }
    std::vector<std::vector<double>> per_model;
    for (const auto& m : report.models) {
      std::vector<double> skill(report.station_ids.size(), 0.0);
      for (std::size_t st = 0; st < skill.size(); ++st) {
        const double denom = it->station_crps[st];
        if (denom == 0.0) throw ZeroReferenceError();
        skill[st] = 1.0 - m.station_crps[st] / denom;
      }
      per_model.push_back(std::move(skill));
    }
    report.crpss.push_back(std::move(per_model));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Rendering

std::string cell_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return std::string(buf);
}

std::string Table::to_text() const {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  if (!title.empty()) out += "# " + title + "\n";
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += "  ";
      // First column left-aligned (labels), the rest right-aligned (numbers).
      const std::size_t pad = width[c] - row[c].size();
      if (c == 0) {
        out += row[c];
        out.append(pad, ' ');
      } else {
        out.append(pad, ' ');
        out += row[c];
      }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

std::string Table::to_csv() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += row[c];
    }
    out += '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

Table overall_crps_table(const EvaluationReport& r) {
  Table t;
  t.title = "mean CRPS over all validation samples";
  t.header = {"model", "mean_crps", "spread_error", "best_stations",
              "train_seconds"};
  for (std::size_t m = 0; m < r.models.size(); ++m) {
    const auto& ev = r.models[m];
    t.rows.push_back({ev.name, cell_fixed(ev.overall_crps), cell_fixed(ev.spread_error),
                      std::to_string(r.best_station_tally[m]),
                      cell_fixed(ev.wall_seconds, 2)});
  }
  return t;
}

Table station_crps_table(const EvaluationReport& r) {
  Table t;
  t.title = "per-station mean CRPS";
  t.header = {"station"};
  for (const auto& m : r.models) t.header.push_back(m.name);
  for (std::size_t st = 0; st < r.station_ids.size(); ++st) {
    std::vector<std::string> row{r.station_ids[st]};
    for (const auto& m : r.models) row.push_back(cell_fixed(m.station_crps[st]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table crpss_table(const EvaluationReport& r, std::size_t reference_index) {
  if (reference_index >= r.reference_names.size()) {
    throw UsageError("crpss_table: reference index out of range");
  }
  Table t;
  t.title = "per-station CRPSS against " + r.reference_names[reference_index];
  t.header = {"station"};
  for (const auto& m : r.models) t.header.push_back(m.name);
  const auto& block = r.crpss[reference_index];
  for (std::size_t st = 0; st < r.station_ids.size(); ++st) {
    std::vector<std::string> row{r.station_ids[st]};
    for (std::size_t m = 0; m < r.models.size(); ++m) {
      row.push_back(cell_fixed(block[m][st]));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table best_model_table(const EvaluationReport& r) {
  Table t;
  t.title = "stations on which each model attains the lowest mean CRPS";
  t.header = {"model", "best_stations"};
  for (std::size_t m = 0; m < r.models.size(); ++m) {
    t.rows.push_back({r.models[m].name, std::to_string(r.best_station_tally[m])});
  }
  return t;
}

Table significance_table(const EvaluationReport& r) {
  Table t;
  t.title = "% of stations where the row model significantly beats the column "
            "model (one-sided DM, BH-corrected, alpha=" +
            cell_fixed(r.alpha, 3) + ")";
  t.header = {"model"};
  for (const auto& m : r.models) t.header.push_back(m.name);
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    std::vector<std::string> row{r.models[i].name};
    for (std::size_t j = 0; j < r.models.size(); ++j) {
      row.push_back(i == j ? "-" : cell_fixed(r.significance[i][j], 1));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table histogram_table(const ModelEvaluation& m) {
  Table t;
  const bool pit = m.histogram.kind == HistogramResult::Kind::pit;
  t.title = std::string(pit ? "PIT" : "rank") + " histogram for " + m.name + " (" +
            std::to_string(m.histogram.n) + " samples, chi-square " +
            cell_fixed(m.histogram.chi_square(), 2) + ")";
  t.header = {"bin", "count"};
  for (std::size_t b = 0; b < m.histogram.counts.size(); ++b) {
    t.rows.push_back(
        {std::to_string(b + 1), std::to_string(m.histogram.counts[b])});
  }
  return t;
}

Table importance_table(const ImportanceReport& r) {
  Table t;
  t.title = "permutation importance for " + r.model_name + " (seed " +
            std::to_string(r.seed) + ", baseline CRPS " +
            cell_fixed(r.baseline_crps) + ")";
  t.header = {"feature", "importance"};
  for (const auto& row : r.sorted_descending()) {
    t.rows.push_back({row.feature, cell_fixed(row.value, 6)});
  }
  return t;
}

namespace {

std::vector<std::string> write_table(const Table& t, const std::string& out_dir,
                                     const std::string& stem) {
  const std::string txt = out_dir + "/" + stem + ".txt";
  const std::string csv = out_dir + "/" + stem + ".csv";
  write_file_atomic(txt, t.to_text());
  write_file_atomic(csv, t.to_csv());
  return {txt, csv};
}

void append_paths(std::vector<std::string>& all, std::vector<std::string> some) {
  for (auto& p : some) all.push_back(std::move(p));
}

}  // namespace

std::vector<std::string> write_evaluation_files(const EvaluationReport& r,
                                                const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);

  std::vector<std::string> written;
  append_paths(written, write_table(overall_crps_table(r), out_dir, "crps_overall"));
  append_paths(written, write_table(station_crps_table(r), out_dir, "crps_stations"));
  for (std::size_t ref = 0; ref < r.reference_names.size(); ++ref) {
    append_paths(written, write_table(crpss_table(r, ref), out_dir,
                                      "crpss_vs_" + r.reference_names[ref]));
  }
  append_paths(written, write_table(best_model_table(r), out_dir, "best_model"));
  append_paths(written, write_table(significance_table(r), out_dir, "significance"));
  for (const auto& m : r.models) {
    append_paths(written, write_table(histogram_table(m), out_dir, "hist_" + m.name));
  }
  return written;
}

std::vector<std::string> write_importance_files(const ImportanceReport& r,
                                                const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);
  return write_table(importance_table(r), out_dir, "importance_" + r.model_name);
}

}  // namespace epp
