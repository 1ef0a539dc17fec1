#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epp/boosting.hpp"
#include "epp/data.hpp"
#include "epp/emos.hpp"
#include "epp/importance.hpp"
#include "epp/network.hpp"
#include "epp/qrf.hpp"

namespace epp {

// Fitted-model persistence. Artifacts are self-describing JSON documents with
// an explicit format version; every floating-point value goes through
// shortest-round-trip formatting, so save -> load -> predict is bit-exact.
constexpr int kArtifactFormatVersion = 1;

struct FitMetadata {
  std::string train_start;  // "YYYY-MM-DD"; empty when not applicable
  std::string train_end;
  double wall_seconds = 0.0;
  std::vector<std::string> log;  // fitting notes / warnings / settings echo
};

struct ModelArtifact {
  int format_version = kArtifactFormatVersion;
  std::string family;  // emos-gl, emos-loc, emos-loc-bst, qrf, or network name
  FeatureSpec features;
  // Station ids in model order for station-keyed families; empty for models
  // that apply unchanged to any station.
  std::vector<std::string> stations;
  FitMetadata meta;

  // Exactly one engaged, matching `family`.
  std::optional<EmosModel> emos;
  std::optional<BoostModel> boost;
  std::optional<QrfModel> qrf;
  std::optional<NetworkModel> network;
};

// Wrap a fitted model; the family tag and the station list (when the family is
// station-keyed) are derived from the model and the training dataset.
ModelArtifact make_artifact(const EmosModel& model, const ForecastDataset& train,
                            FitMetadata meta);
ModelArtifact make_artifact(const BoostModel& model, const ForecastDataset& train,
                            FitMetadata meta);
ModelArtifact make_artifact(const QrfModel& model, const ForecastDataset& train,
                            FitMetadata meta);
ModelArtifact make_artifact(const NetworkModel& model, const ForecastDataset& train,
                            FitMetadata meta);

std::string serialize_artifact(const ModelArtifact& artifact);
// context names the source (e.g. a path) in error messages.
ModelArtifact parse_artifact(const std::string& text, const std::string& context);

void save_artifact(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_artifact(const std::string& path);

// True when the family predicts a quantile set rather than a Gaussian.
bool artifact_is_quantile_family(const ModelArtifact& artifact);

// Prediction routing. Gaussian families reject quantile requests and vice
// versa with UsageError.
GaussianForecast artifact_predict_gaussian(const ModelArtifact& artifact,
                                           const Sample& sample);
QuantileForecast artifact_predict_quantiles(const ModelArtifact& artifact,
                                            const Sample& sample,
                                            const std::vector<double>& levels);

// CRPS of the artifact's forecast for one sample (quantile families scored by
// the ensemble treatment of their level set).
double artifact_crps(const ModelArtifact& artifact, const Sample& sample);

// Scorer for permutation importance. The artifact must outlive the scorer.
SampleScorer artifact_scorer(const ModelArtifact& artifact,
                             const ForecastDataset& valid);

}  // namespace epp
