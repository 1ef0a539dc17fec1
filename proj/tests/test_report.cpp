#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "epp/artifact.hpp"
#include "epp/data.hpp"
#include "epp/errors.hpp"
#include "epp/report.hpp"
#include "epp/textio.hpp"
#include "epp/scoring.hpp"

using namespace epp;

namespace {

struct Bench {
  ForecastDataset train;
  ForecastDataset valid;
};

Bench small_bench(std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.stations = 4;
  cfg.days = 160;
  cfg.members = 5;
  cfg.seed = seed;
  const ForecastDataset all = generate_synthetic(cfg);
  const Date split_start = all.samples.front().valid_time;
  Bench b;
  const SplitResult parts = split_by_period(
      all, DateRange{split_start, add_days(split_start, 119)},
      DateRange{add_days(split_start, 120), add_days(split_start, 159)});
  b.train = parts.train;
  b.valid = parts.valid;
  return b;
}

FitMetadata meta_with_time(double seconds) {
  FitMetadata m;
  m.wall_seconds = seconds;
  return m;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("evaluation on a small two-model benchmark") {
    const Bench b = small_bench(71);
    std::vector<ModelArtifact> artifacts;
    artifacts.push_back(
        make_artifact(fit_emos(b.train, EmosScope::global), b.train, meta_with_time(1.5)));
    artifacts.push_back(
        make_artifact(fit_emos(b.train, EmosScope::local), b.train, meta_with_time(2.5)));

    const EvaluationReport r =
        evaluate_artifacts(artifacts, b.valid, {"emos-gl"}, 0.05, 99);

    SUBCASE("shape and ordering") {
      REQUIRE(r.models.size() == 3);  // raw + two artifacts
      CHECK(r.models[0].name == "raw");
      CHECK(r.models[1].name == "emos-gl");
      CHECK(r.models[2].name == "emos-loc");
      CHECK(r.station_ids.size() == 4);
      for (const auto& m : r.models) {
        CHECK(m.station_crps.size() == 4);
        CHECK(m.scores.scores.size() == 4);
        for (const auto& s : m.scores.scores) CHECK(s.size() == 40);
      }
      CHECK(r.models[1].wall_seconds == 1.5);
      CHECK(r.models[2].wall_seconds == 2.5);
    }

    SUBCASE("overall CRPS is consistent with the station series") {
      for (const auto& m : r.models) {
        double total = 0.0;
        std::size_t n = 0;
        for (const auto& s : m.scores.scores) {
          for (const double v : s) total += v;
          n += s.size();
        }
        CHECK(std::abs(m.overall_crps - total / static_cast<double>(n)) < 1e-12);
        CHECK(m.overall_crps > 0.0);
      }
    }

    SUBCASE("station-aware post-processing beats the underdispersed raw ensemble") {
      // With only 4 stations the global affine fit cannot absorb the
      // station-specific biases, so only the local model is asserted here; the
      // full-scale ordering lives in the acceptance benchmark.
      CHECK(r.models[2].overall_crps < r.models[0].overall_crps);
      CHECK(r.models[2].overall_crps < r.models[1].overall_crps);
    }

    SUBCASE("histogram kinds per family") {
      CHECK(r.models[0].histogram.kind == HistogramResult::Kind::rank);
      CHECK(r.models[0].histogram.bins() == 6);  // 5 members + 1
      CHECK(r.models[1].histogram.kind == HistogramResult::Kind::pit);
      CHECK(r.models[1].histogram.bins() == 20);
      long total = 0;
      for (const long c : r.models[0].histogram.counts) total += c;
      CHECK(total == 160);
    }

    SUBCASE("CRPSS against a model is zero for itself") {
      REQUIRE(r.crpss.size() == 1);
      const auto& block = r.crpss[0];  // reference emos-gl is model index 1
      for (std::size_t st = 0; st < 4; ++st) CHECK(block[1][st] == 0.0);
      // And matches the definition for the others.
      for (std::size_t st = 0; st < 4; ++st) {
        const double expect =
            1.0 - r.models[2].station_crps[st] / r.models[1].station_crps[st];
        CHECK(std::abs(block[2][st] - expect) < 1e-15);
      }
    }

    SUBCASE("best-model tally covers every station exactly once") {
      int total = 0;
      for (const int c : r.best_station_tally) total += c;
      CHECK(total == 4);
    }

    SUBCASE("significance matrix shape and range") {
      REQUIRE(r.significance.size() == 3);
      for (const auto& row : r.significance) {
        REQUIRE(row.size() == 3);
        for (const double v : row) {
          CHECK(v >= 0.0);
          CHECK(v <= 100.0);
        }
      }
      for (std::size_t i = 0; i < 3; ++i) CHECK(r.significance[i][i] == 0.0);
    }

    SUBCASE("determinism") {
      const EvaluationReport r2 =
          evaluate_artifacts(artifacts, b.valid, {"emos-gl"}, 0.05, 99);
      for (std::size_t m = 0; m < r.models.size(); ++m) {
        CHECK(r.models[m].overall_crps == r2.models[m].overall_crps);
        CHECK(r.models[m].histogram.counts == r2.models[m].histogram.counts);
      }
    }
  }

  TEST_CASE("quantile forests are scored through their level set") {
    const Bench b = small_bench(73);
    QrfOptions opt;
    opt.n_trees = 10;
    opt.min_leaf_size = 10;
    std::vector<ModelArtifact> artifacts;
    artifacts.push_back(make_artifact(fit_qrf(b.train, opt), b.train, meta_with_time(0)));

    const EvaluationReport r = evaluate_artifacts(artifacts, b.valid, {}, 0.05, 7);
    REQUIRE(r.models.size() == 2);
    CHECK(r.models[1].name == "qrf");
    CHECK(r.models[1].histogram.kind == HistogramResult::Kind::rank);
    CHECK(r.models[1].histogram.bins() == 52);  // 51 quantiles + 1
    CHECK(r.models[1].overall_crps > 0.0);
    CHECK(std::isfinite(r.models[1].spread_error));
  }

  TEST_CASE("grid mismatches fail loudly") {
    const Bench b = small_bench(79);
    std::vector<ModelArtifact> artifacts;
    artifacts.push_back(
        make_artifact(fit_emos(b.train, EmosScope::local), b.train, meta_with_time(0)));

    SUBCASE("different station table") {
      ForecastDataset renamed = b.valid;
      renamed.stations[0].id = "IMPOSTOR";
      CHECK_THROWS_AS(evaluate_artifacts(artifacts, renamed, {}, 0.05, 1),
                      GridMismatchError);
    }
    SUBCASE("different feature spec") {
      ForecastDataset refeat = b.valid;
      refeat.features.names[2] += "_x";
      CHECK_THROWS_AS(evaluate_artifacts(artifacts, refeat, {}, 0.05, 1),
                      GridMismatchError);
    }
    SUBCASE("unknown reference name") {
      CHECK_THROWS_AS(evaluate_artifacts(artifacts, b.valid, {"nope"}, 0.05, 1),
                      UsageError);
    }
    SUBCASE("alpha out of range") {
      CHECK_THROWS_AS(evaluate_artifacts(artifacts, b.valid, {}, 0.0, 1), UsageError);
      CHECK_THROWS_AS(evaluate_artifacts(artifacts, b.valid, {}, 1.0, 1), UsageError);
    }
    SUBCASE("empty validation set") {
      ForecastDataset empty = b.valid;
      empty.samples.clear();
      CHECK_THROWS_AS(evaluate_artifacts(artifacts, empty, {}, 0.05, 1),
                      EmptyDatasetError);
    }
  }

  TEST_CASE("duplicate family names are made unique") {
    const Bench b = small_bench(83);
    std::vector<ModelArtifact> artifacts;
    artifacts.push_back(
        make_artifact(fit_emos(b.train, EmosScope::global), b.train, meta_with_time(0)));
    artifacts.push_back(
        make_artifact(fit_emos(b.train, EmosScope::global), b.train, meta_with_time(0)));
    const EvaluationReport r = evaluate_artifacts(artifacts, b.valid, {}, 0.05, 1);
    CHECK(r.models[1].name == "emos-gl");
    CHECK(r.models[2].name == "emos-gl(2)");
  }

  TEST_CASE("table rendering") {
    Table t;
    t.title = "demo";
    t.header = {"model", "score"};
    t.rows = {{"alpha", "1.2345"}, {"bee", "12.0000"}};

    SUBCASE("text is aligned and ends each line cleanly") {
      const std::string text = t.to_text();
      CHECK(text == "# demo\n"
                    "model    score\n"
                    "alpha   1.2345\n"
                    "bee    12.0000\n");
    }
    SUBCASE("csv is plain comma-delimited") {
      CHECK(t.to_csv() == "model,score\nalpha,1.2345\nbee,12.0000\n");
    }
    SUBCASE("fixed cells") {
      CHECK(cell_fixed(1.0 / 3.0) == "0.3333");
      CHECK(cell_fixed(2.5, 1) == "2.5");
      CHECK(cell_fixed(-0.1, 2) == "-0.10");
    }
  }

  TEST_CASE("files are written as text and csv side by side") {
    const Bench b = small_bench(89);
    std::vector<ModelArtifact> artifacts;
    artifacts.push_back(
        make_artifact(fit_emos(b.train, EmosScope::global), b.train, meta_with_time(0)));
    const EvaluationReport r =
        evaluate_artifacts(artifacts, b.valid, {"raw"}, 0.05, 3);

    const std::string dir = "report_test_out";
    std::filesystem::remove_all(dir);
    const auto written = write_evaluation_files(r, dir);
    CHECK(written.size() ==
          2 * (2          // overall + station crps
               + 1        // one reference
               + 2        // best-model + significance
               + r.models.size()));  // histograms
    for (const auto& p : written) {
      CHECK(std::filesystem::exists(p));
      CHECK(std::filesystem::file_size(p) > 0);
    }
    // Spot-check content of the overall table.
    const std::string overall = read_file(dir + "/crps_overall.csv");
    CHECK(overall.find("model,mean_crps,spread_error,best_stations,train_seconds") == 0);
    CHECK(overall.find("raw,") != std::string::npos);
    CHECK(overall.find("emos-gl,") != std::string::npos);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("importance files") {
    ImportanceReport rep;
    rep.model_name = "demo-model";
    rep.seed = 5;
    rep.baseline_crps = 0.5;
    rep.features = {"a", "b", "c"};
    rep.values = {0.01, 0.5, -0.002};

    const Table t = importance_table(rep);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0][0] == "b");
    CHECK(t.rows[1][0] == "a");
    CHECK(t.rows[2][0] == "c");

    const std::string dir = "report_importance_out";
    std::filesystem::remove_all(dir);
    const auto written = write_importance_files(rep, dir);
    CHECK(written.size() == 2);
    const std::string csv = read_file(dir + "/importance_demo-model.csv");
    CHECK(csv.find("feature,importance") == 0);
    CHECK(csv.find("b,0.5") != std::string::npos);
    std::filesystem::remove_all(dir);
  }
}
