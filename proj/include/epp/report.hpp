#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epp/artifact.hpp"
#include "epp/data.hpp"
#include "epp/importance.hpp"
#include "epp/verification.hpp"

namespace epp {

// Everything the evaluate command computes for one model on the validation
// grid. The raw ensemble, when member columns are present, appears as a model
// named "raw" scored by its empirical CDF.
struct ModelEvaluation {
  std::string name;
  double overall_crps = 0.0;
  std::vector<double> station_crps;  // validation station order
  PerStationScores scores;           // [station][day] CRPS series, day-sorted
  HistogramResult histogram;         // PIT (Gaussian) or rank (ensemble/quantile)
  double spread_error = 0.0;
  double wall_seconds = 0.0;  // training wall-clock carried by the artifact
};

struct EvaluationReport {
  std::vector<std::string> station_ids;
  std::vector<ModelEvaluation> models;  // raw first when present
  double alpha = 0.05;
  // [i][j]: % of stations where model i significantly beats model j
  // (one-sided Diebold-Mariano, Benjamini-Hochberg corrected at alpha).
  std::vector<std::vector<double>> significance;
  std::vector<int> best_station_tally;  // per model: stations where it is best
  std::vector<std::string> reference_names;
  // crpss[r][m][s]: skill of model m against reference r at station s.
  std::vector<std::vector<std::vector<double>>> crpss;
};

// Scores every artifact (plus the raw ensemble when members are present) on
// the identical (station, day) grid of `valid`. The rank-histogram tie-break
// seed is `rank_seed`. References select the CRPSS denominators by model name.
EvaluationReport evaluate_artifacts(const std::vector<ModelArtifact>& artifacts,
                                    const ForecastDataset& valid,
                                    const std::vector<std::string>& references,
                                    double alpha, std::uint64_t rank_seed);

// Minimal table container rendered as aligned text and as CSV.
struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_text() const;  // space-aligned, title + header + rows
  std::string to_csv() const;   // header + rows, comma-delimited
};

// Fixed-precision cell helpers shared by the table builders.
std::string cell_fixed(double v, int decimals = 4);

Table overall_crps_table(const EvaluationReport& r);
Table station_crps_table(const EvaluationReport& r);
Table crpss_table(const EvaluationReport& r, std::size_t reference_index);
Table best_model_table(const EvaluationReport& r);
Table significance_table(const EvaluationReport& r);
Table histogram_table(const ModelEvaluation& m);
Table importance_table(const ImportanceReport& r);

// Writes every table of the report (text + csv side by side) into `out_dir`,
// creating it if needed. Returns the paths written.
std::vector<std::string> write_evaluation_files(const EvaluationReport& r,
                                                const std::string& out_dir);
std::vector<std::string> write_importance_files(const ImportanceReport& r,
                                                const std::string& out_dir);

}  // namespace epp
