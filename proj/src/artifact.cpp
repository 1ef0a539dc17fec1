#include "epp/artifact.hpp"

#include <utility>

#include "epp/errors.hpp"
#include "epp/scoring.hpp"
#include "epp/textio.hpp"
#include "json.hpp"

namespace epp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& ctx, const std::string& detail) {
  throw DataError("artifact " + ctx + ": " + detail);
}

const json& need(const json& j, const char* key, const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end()) fail(ctx, std::string("missing key '") + key + "'");
  return *it;
}

json coeffs_to_json(const EmosCoefficients& k) {
  return json{{"a", k.a},
              {"b", k.b},
              {"c", k.c},
              {"d", k.d},
              {"converged", k.converged},
              {"iterations", k.iterations}};
}

EmosCoefficients coeffs_from_json(const json& j, const std::string& ctx) {
  EmosCoefficients k;
  k.a = need(j, "a", ctx).get<double>();
  k.b = need(j, "b", ctx).get<double>();
  k.c = need(j, "c", ctx).get<double>();
  k.d = need(j, "d", ctx).get<double>();
  k.converged = need(j, "converged", ctx).get<bool>();
  k.iterations = need(j, "iterations", ctx).get<int>();
  return k;
}

json emos_to_json(const EmosModel& m) {
  json per = json::array();
  for (const auto& k : m.per_station) per.push_back(coeffs_to_json(k));
  return json{{"scope", m.scope == EmosScope::global ? "global" : "local"},
              {"global", coeffs_to_json(m.global)},
              {"per_station", per},
              {"used_fallback", std::vector<bool>(m.used_fallback)},
              {"warnings", m.warnings},
              {"mean_index", m.mean_index},
              {"sd_index", m.sd_index}};
}

EmosModel emos_from_json(const json& j, const std::string& ctx) {
  EmosModel m;
  const std::string scope = need(j, "scope", ctx).get<std::string>();
  if (scope == "global") {
    m.scope = EmosScope::global;
  } else if (scope == "local") {
    m.scope = EmosScope::local;
  } else {
    fail(ctx, "unknown affine-model scope '" + scope + "'");
  }
  m.global = coeffs_from_json(need(j, "global", ctx), ctx);
  for (const auto& kj : need(j, "per_station", ctx)) {
    m.per_station.push_back(coeffs_from_json(kj, ctx));
  }
  m.used_fallback = need(j, "used_fallback", ctx).get<std::vector<bool>>();
  m.warnings = need(j, "warnings", ctx).get<std::vector<std::string>>();
  m.mean_index = need(j, "mean_index", ctx).get<int>();
  m.sd_index = need(j, "sd_index", ctx).get<int>();
  return m;
}

json boost_to_json(const BoostModel& m) {
  json per = json::array();
  for (const auto& k : m.per_station) {
    per.push_back(json{{"beta", pack_doubles(k.beta)},
                       {"gamma", pack_doubles(k.gamma)},
                       {"iterations_used", k.iterations_used}});
  }
  return json{{"options",
               json{{"max_iter", m.options.max_iter},
                    {"step", m.options.step},
                    {"aic_stopping", m.options.aic_stopping}}},
              {"feature_names", m.feature_names},
              {"feature_indices", pack_ints(m.feature_indices)},
              {"feature_mean", pack_doubles(m.feature_mean)},
              {"feature_sd", pack_doubles(m.feature_sd)},
              {"per_station", per},
              {"warnings", m.warnings}};
}

BoostModel boost_from_json(const json& j, const std::string& ctx) {
  BoostModel m;
  const json& opt = need(j, "options", ctx);
  m.options.max_iter = need(opt, "max_iter", ctx).get<int>();
  m.options.step = need(opt, "step", ctx).get<double>();
  m.options.aic_stopping = need(opt, "aic_stopping", ctx).get<bool>();
  m.feature_names = need(j, "feature_names", ctx).get<std::vector<std::string>>();
  m.feature_indices =
      unpack_ints(need(j, "feature_indices", ctx).get<std::string>(), ctx);
  m.feature_mean =
      unpack_doubles(need(j, "feature_mean", ctx).get<std::string>(), ctx);
  m.feature_sd = unpack_doubles(need(j, "feature_sd", ctx).get<std::string>(), ctx);
  for (const auto& kj : need(j, "per_station", ctx)) {
    BoostCoefficients k;
    k.beta = unpack_doubles(need(kj, "beta", ctx).get<std::string>(), ctx);
    k.gamma = unpack_doubles(need(kj, "gamma", ctx).get<std::string>(), ctx);
    k.iterations_used = need(kj, "iterations_used", ctx).get<int>();
    m.per_station.push_back(std::move(k));
  }
  m.warnings = need(j, "warnings", ctx).get<std::vector<std::string>>();
  return m;
}

json qrf_to_json(const QrfModel& m) {
  json stations = json::array();
  for (const auto& forest : m.per_station) {
    json trees = json::array();
    for (const auto& t : forest) {
      std::vector<int> feature, left, right, leaf_begin, leaf_end;
      std::vector<double> threshold;
      feature.reserve(t.nodes.size());
      for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        leaf_begin.push_back(n.leaf_begin);
        leaf_end.push_back(n.leaf_end);
      }
      trees.push_back(json{{"feature", pack_ints(feature)},
                           {"threshold", pack_doubles(threshold)},
                           {"left", pack_ints(left)},
                           {"right", pack_ints(right)},
                           {"leaf_begin", pack_ints(leaf_begin)},
                           {"leaf_end", pack_ints(leaf_end)},
                           {"leaf_values", pack_doubles(t.leaf_values)}});
    }
    stations.push_back(std::move(trees));
  }
  return json{{"options",
               json{{"n_trees", m.options.n_trees},
                    {"mtry", m.options.mtry},
                    {"min_leaf_size", m.options.min_leaf_size},
                    {"seed", m.options.seed},
                    {"bootstrap", m.options.bootstrap}}},
              {"predictor_count", m.predictor_count},
              {"per_station", stations}};
}

QrfModel qrf_from_json(const json& j, const std::string& ctx) {
  QrfModel m;
  const json& opt = need(j, "options", ctx);
  m.options.n_trees = need(opt, "n_trees", ctx).get<int>();
  m.options.mtry = need(opt, "mtry", ctx).get<int>();
  m.options.min_leaf_size = need(opt, "min_leaf_size", ctx).get<int>();
  m.options.seed = need(opt, "seed", ctx).get<std::uint64_t>();
  m.options.bootstrap = need(opt, "bootstrap", ctx).get<bool>();
  m.predictor_count = need(j, "predictor_count", ctx).get<int>();
  for (const auto& forest_j : need(j, "per_station", ctx)) {
    std::vector<QrfTree> forest;
    for (const auto& tj : forest_j) {
      QrfTree t;
      const auto feature = unpack_ints(need(tj, "feature", ctx).get<std::string>(), ctx);
      const auto threshold =
          unpack_doubles(need(tj, "threshold", ctx).get<std::string>(), ctx);
      const auto left = unpack_ints(need(tj, "left", ctx).get<std::string>(), ctx);
      const auto right = unpack_ints(need(tj, "right", ctx).get<std::string>(), ctx);
      const auto leaf_begin =
          unpack_ints(need(tj, "leaf_begin", ctx).get<std::string>(), ctx);
      const auto leaf_end =
          unpack_ints(need(tj, "leaf_end", ctx).get<std::string>(), ctx);
      if (threshold.size() != feature.size() || left.size() != feature.size() ||
          right.size() != feature.size() || leaf_begin.size() != feature.size() ||
          leaf_end.size() != feature.size()) {
        fail(ctx, "tree node arrays disagree in length");
      }
      t.nodes.resize(feature.size());
      for (std::size_t i = 0; i < feature.size(); ++i) {
        t.nodes[i] = QrfNode{feature[i], threshold[i], left[i],
                             right[i],   leaf_begin[i], leaf_end[i]};
      }
      t.leaf_values =
          unpack_doubles(need(tj, "leaf_values", ctx).get<std::string>(), ctx);
      forest.push_back(std::move(t));
    }
    m.per_station.push_back(std::move(forest));
  }
  return m;
}

json network_to_json(const NetworkModel& m) {
  json runs = json::array();
  for (const auto& r : m.runs) {
    runs.push_back(json{{"n_inputs", r.n_inputs},
                        {"hidden", r.hidden},
                        {"n_emb", r.n_emb},
                        {"n_stations", r.n_stations},
                        {"theta", pack_doubles(r.theta)}});
  }
  json diags = json::array();
  for (const auto& d : m.diagnostics) {
    diags.push_back(json{{"epochs_run", d.epochs_run},
                         {"best_epoch", d.best_epoch},
                         {"best_holdout_crps", d.best_holdout_crps},
                         {"holdout_history", pack_doubles(d.holdout_history)}});
  }
  return json{{"config",
               json{{"variant", variant_name(m.config.variant)},
                    {"hidden_nodes", m.config.hidden_nodes},
                    {"n_emb", m.config.n_emb},
                    {"epochs", m.config.epochs},
                    {"learning_rate", m.config.learning_rate},
                    {"batch_size", m.config.batch_size},
                    {"run_count", m.config.run_count},
                    {"seed", m.config.seed},
                    {"holdout_fraction", m.config.holdout_fraction},
                    {"patience", m.config.patience}}},
              {"input_indices", pack_ints(m.input_indices)},
              {"input_mean", pack_doubles(m.input_mean)},
              {"input_sd", pack_doubles(m.input_sd)},
              {"runs", runs},
              {"diagnostics", diags}};
}

NetworkModel network_from_json(const json& j, const std::string& ctx) {
  NetworkModel m;
  const json& cfg = need(j, "config", ctx);
  m.config.variant = variant_from_name(need(cfg, "variant", ctx).get<std::string>());
  m.config.hidden_nodes = need(cfg, "hidden_nodes", ctx).get<int>();
  m.config.n_emb = need(cfg, "n_emb", ctx).get<int>();
  m.config.epochs = need(cfg, "epochs", ctx).get<int>();
  m.config.learning_rate = need(cfg, "learning_rate", ctx).get<double>();
  m.config.batch_size = need(cfg, "batch_size", ctx).get<int>();
  m.config.run_count = need(cfg, "run_count", ctx).get<int>();
  m.config.seed = need(cfg, "seed", ctx).get<std::uint64_t>();
  m.config.holdout_fraction = need(cfg, "holdout_fraction", ctx).get<double>();
  m.config.patience = need(cfg, "patience", ctx).get<int>();
  m.input_indices = unpack_ints(need(j, "input_indices", ctx).get<std::string>(), ctx);
  m.input_mean = unpack_doubles(need(j, "input_mean", ctx).get<std::string>(), ctx);
  m.input_sd = unpack_doubles(need(j, "input_sd", ctx).get<std::string>(), ctx);
  for (const auto& rj : need(j, "runs", ctx)) {
    NetworkParams r;
    r.variant = m.config.variant;
    r.n_inputs = need(rj, "n_inputs", ctx).get<int>();
    r.hidden = need(rj, "hidden", ctx).get<int>();
    r.n_emb = need(rj, "n_emb", ctx).get<int>();
    r.n_stations = need(rj, "n_stations", ctx).get<int>();
    r.theta = unpack_doubles(need(rj, "theta", ctx).get<std::string>(), ctx);
    if (r.theta.size() != static_cast<std::size_t>(r.size())) {
      fail(ctx, "network parameter vector length disagrees with its shape");
    }
    m.runs.push_back(std::move(r));
  }
  for (const auto& dj : need(j, "diagnostics", ctx)) {
    TrainDiagnostics d;
    d.epochs_run = need(dj, "epochs_run", ctx).get<int>();
    d.best_epoch = need(dj, "best_epoch", ctx).get<int>();
    d.best_holdout_crps = need(dj, "best_holdout_crps", ctx).get<double>();
    d.holdout_history =
        unpack_doubles(need(dj, "holdout_history", ctx).get<std::string>(), ctx);
    m.diagnostics.push_back(std::move(d));
  }
  return m;
}

std::vector<std::string> station_ids(const ForecastDataset& train) {
  std::vector<std::string> ids;
  ids.reserve(train.stations.size());
  for (const auto& s : train.stations) ids.push_back(s.id);
  return ids;
}

void check_station_count(std::size_t per_station, std::size_t ids,
                         const std::string& family) {
  if (per_station != ids) {
    throw DimensionMismatchError(family + " model holds " +
                                 std::to_string(per_station) +
                                 " station entries, dataset has " +
                                 std::to_string(ids));
  }
}

}  // namespace

ModelArtifact make_artifact(const EmosModel& model, const ForecastDataset& train,
                            FitMetadata meta) {
  ModelArtifact a;
  a.family = model.scope == EmosScope::global ? "emos-gl" : "emos-loc";
  a.features = train.features;
  if (model.scope == EmosScope::local) {
    a.stations = station_ids(train);
    check_station_count(model.per_station.size(), a.stations.size(), a.family);
  }
  a.meta = std::move(meta);
  a.emos = model;
  return a;
}

ModelArtifact make_artifact(const BoostModel& model, const ForecastDataset& train,
                            FitMetadata meta) {
  ModelArtifact a;
  a.family = "emos-loc-bst";
  a.features = train.features;
  a.stations = station_ids(train);
  check_station_count(model.per_station.size(), a.stations.size(), a.family);
  a.meta = std::move(meta);
  a.boost = model;
  return a;
}

ModelArtifact make_artifact(const QrfModel& model, const ForecastDataset& train,
                            FitMetadata meta) {
  ModelArtifact a;
  a.family = "qrf";
  a.features = train.features;
  a.stations = station_ids(train);
  check_station_count(model.per_station.size(), a.stations.size(), a.family);
  a.meta = std::move(meta);
  a.qrf = model;
  return a;
}

ModelArtifact make_artifact(const NetworkModel& model, const ForecastDataset& train,
                            FitMetadata meta) {
  ModelArtifact a;
  a.family = variant_name(model.config.variant);
  a.features = train.features;
  if (variant_uses_embedding(model.config.variant)) {
    a.stations = station_ids(train);
  }
  a.meta = std::move(meta);
  a.network = model;
  return a;
}

std::string serialize_artifact(const ModelArtifact& artifact) {
  json j;
  j["format_version"] = artifact.format_version;
  j["family"] = artifact.family;
  j["features"] = artifact.features.names;
  j["stations"] = artifact.stations;
  j["meta"] = json{{"train_start", artifact.meta.train_start},
                   {"train_end", artifact.meta.train_end},
                   {"wall_seconds", artifact.meta.wall_seconds},
                   {"log", artifact.meta.log}};
  if (artifact.emos) {
    j["payload"] = emos_to_json(*artifact.emos);
  } else if (artifact.boost) {
    j["payload"] = boost_to_json(*artifact.boost);
  } else if (artifact.qrf) {
    j["payload"] = qrf_to_json(*artifact.qrf);
  } else if (artifact.network) {
    j["payload"] = network_to_json(*artifact.network);
  } else {
    throw UsageError("serialize_artifact: no model attached");
  }
  return j.dump();
}

ModelArtifact parse_artifact(const std::string& text, const std::string& context) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(context, std::string("not valid JSON: ") + e.what());
  }
  try {
    ModelArtifact a;
    const json& version = need(j, "format_version", context);
    if (!version.is_number_integer() ||
        version.get<int>() != kArtifactFormatVersion) {
      throw FormatVersionError(context + " declares version " + version.dump() +
                               ", this build reads version " +
                               std::to_string(kArtifactFormatVersion));
    }
    a.format_version = version.get<int>();
    a.family = need(j, "family", context).get<std::string>();
    a.features.names =
        need(j, "features", context).get<std::vector<std::string>>();
    a.stations = need(j, "stations", context).get<std::vector<std::string>>();
    const json& meta = need(j, "meta", context);
    a.meta.train_start = need(meta, "train_start", context).get<std::string>();
    a.meta.train_end = need(meta, "train_end", context).get<std::string>();
    a.meta.wall_seconds = need(meta, "wall_seconds", context).get<double>();
    a.meta.log = need(meta, "log", context).get<std::vector<std::string>>();

    const json& payload = need(j, "payload", context);
    if (a.family == "emos-gl" || a.family == "emos-loc") {
      a.emos = emos_from_json(payload, context);
    } else if (a.family == "emos-loc-bst") {
      a.boost = boost_from_json(payload, context);
    } else if (a.family == "qrf") {
      a.qrf = qrf_from_json(payload, context);
    } else {
      bool is_network = false;
      for (NetVariant v : {NetVariant::fcn, NetVariant::fcn_aux, NetVariant::fcn_emb,
                           NetVariant::fcn_aux_emb, NetVariant::nn_aux,
                           NetVariant::nn_aux_emb}) {
        if (variant_name(v) == a.family) {
          is_network = true;
          break;
        }
      }
      if (!is_network) {
        throw FormatVersionError(context + ": unknown model family '" + a.family +
                                 "'");
      }
      a.network = network_from_json(payload, context);
    }
    return a;
  } catch (const json::exception& e) {
    fail(context, std::string("malformed field: ") + e.what());
  }
}

void save_artifact(const ModelArtifact& artifact, const std::string& path) {
  write_file_atomic(path, serialize_artifact(artifact));
}

ModelArtifact load_artifact(const std::string& path) {
  return parse_artifact(read_file(path), path);
}

bool artifact_is_quantile_family(const ModelArtifact& artifact) {
  return artifact.qrf.has_value();
}

GaussianForecast artifact_predict_gaussian(const ModelArtifact& artifact,
                                           const Sample& sample) {
  if (artifact.emos) return predict_emos(*artifact.emos, sample);
  if (artifact.boost) return predict_emos_boost(*artifact.boost, sample);
  if (artifact.network) return predict_network(*artifact.network, sample);
  throw UsageError("model family '" + artifact.family +
                   "' predicts quantiles, not a Gaussian");
}

QuantileForecast artifact_predict_quantiles(const ModelArtifact& artifact,
                                            const Sample& sample,
                                            const std::vector<double>& levels) {
  if (artifact.qrf) return predict_quantiles(*artifact.qrf, sample, levels);
  throw UsageError("model family '" + artifact.family +
                   "' predicts a Gaussian, not quantiles");
}

double artifact_crps(const ModelArtifact& artifact, const Sample& sample) {
  if (artifact.qrf) {
    return crps_quantile_approx(
        predict_quantiles(*artifact.qrf, sample, default_quantile_levels()),
        sample.obs);
  }
  return crps_normal(artifact_predict_gaussian(artifact, sample), sample.obs);
}

SampleScorer artifact_scorer(const ModelArtifact& artifact,
                             const ForecastDataset& valid) {
  if (artifact.emos) return make_scorer(*artifact.emos, valid);
  if (artifact.boost) return make_scorer(*artifact.boost, valid);
  if (artifact.qrf) return make_scorer(*artifact.qrf, valid);
  if (artifact.network) return make_scorer(*artifact.network, valid);
  throw UsageError("artifact_scorer: no model attached");
}

}  // namespace epp
