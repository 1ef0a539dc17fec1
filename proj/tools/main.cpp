// eppc: command-line front end for the ensemble post-processing library.
//
// Subcommands: generate, train, predict, evaluate, importance.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
// Every command is deterministic given its flags; all randomness flows from
// explicit seeds, and every output file is written atomically.

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "epp/artifact.hpp"
#include "epp/boosting.hpp"
#include "epp/data.hpp"
#include "epp/dates.hpp"
#include "epp/emos.hpp"
#include "epp/errors.hpp"
#include "epp/importance.hpp"
#include "epp/network.hpp"
#include "epp/qrf.hpp"
#include "epp/report.hpp"
#include "epp/scoring.hpp"
#include "epp/textio.hpp"

namespace {

using namespace epp;

using ConfigLines = std::vector<std::pair<std::string, std::string>>;

void print_config(const std::string& command, const ConfigLines& lines) {
  std::cout << "config (" << command << "):\n";
  for (const auto& [k, v] : lines) std::cout << "  " << k << " = " << v << "\n";
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Date parse_date_flag(const std::string& text, const std::string& flag) {
  try {
    return parse_date(text);
  } catch (const DataError& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

// Training date span of a dataset, for the artifact metadata.
std::pair<std::string, std::string> date_span(const ForecastDataset& ds) {
  if (ds.samples.empty()) return {"", ""};
  Date lo = ds.samples.front().valid_time;
  Date hi = lo;
  for (const auto& s : ds.samples) {
    if (s.valid_time < lo) lo = s.valid_time;
    if (hi < s.valid_time) hi = s.valid_time;
  }
  return {format_date(lo), format_date(hi)};
}

const std::vector<std::string> kModelNames = {
    "emos-gl",     "emos-loc", "emos-loc-bst", "qrf",    "fcn",
    "fcn-aux",     "fcn-emb",  "fcn-aux-emb",  "nn-aux", "nn-aux-emb"};

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string out;
  SyntheticConfig cfg;
  std::string start = "2014-01-01";
};

int run_generate(const GenerateArgs& a) {
  GenerateArgs resolved = a;
  resolved.cfg.start_date = parse_date_flag(a.start, "--start");
  const ForecastDataset ds = generate_synthetic(resolved.cfg);
  write_csv(a.out, ds);
  print_config("generate",
               {{"out", a.out},
                {"stations", std::to_string(resolved.cfg.stations)},
                {"days", std::to_string(resolved.cfg.days)},
                {"members", std::to_string(resolved.cfg.members)},
                {"seed", std::to_string(resolved.cfg.seed)},
                {"start", format_date(resolved.cfg.start_date)},
                {"bias", format_double(resolved.cfg.bias_amplitude)},
                {"nonlinearity", format_double(resolved.cfg.nonlinearity_amplitude)},
                {"station-bias", format_double(resolved.cfg.station_bias_scale)},
                {"underdispersion", format_double(resolved.cfg.underdispersion)},
                {"noise", format_double(resolved.cfg.noise_scale)}});
  std::cout << "wrote " << ds.samples.size() << " rows (" << ds.stations.size()
            << " stations x " << resolved.cfg.days << " days) to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string model;
  std::string data;
  std::string out;
  std::uint64_t seed = 1;
  bool show_config = false;

  BoostOptions boost;
  QrfOptions qrf;
  NetworkConfig net;
  bool no_bootstrap = false;
  bool no_aic_stop = false;
};

int run_train(const TrainArgs& a) {
  if (std::find(kModelNames.begin(), kModelNames.end(), a.model) ==
      kModelNames.end()) {
    std::string expected;
    for (const auto& n : kModelNames) expected += " " + n;
    throw UsageError("unknown model: " + a.model + " (expected one of:" +
                     expected + ")");
  }
  const LoadResult loaded = load_csv(a.data);
  const ForecastDataset& train = loaded.data;
  if (loaded.dropped_rows > 0) {
    std::cout << "note: dropped " << loaded.dropped_rows
              << " rows with missing values\n";
  }

  FitMetadata meta;
  std::tie(meta.train_start, meta.train_end) = date_span(train);

  ConfigLines config{{"model", a.model},
                     {"data", a.data},
                     {"out", a.out},
                     {"seed", std::to_string(a.seed)}};

  const auto t0 = std::chrono::steady_clock::now();
  ModelArtifact artifact;
  if (a.model == "emos-gl" || a.model == "emos-loc") {
    const EmosScope scope =
        a.model == "emos-gl" ? EmosScope::global : EmosScope::local;
    EmosModel m = fit_emos(train, scope);
    meta.wall_seconds = seconds_since(t0);
    meta.log = m.warnings;
    artifact = make_artifact(m, train, meta);
  } else if (a.model == "emos-loc-bst") {
    BoostOptions opt = a.boost;
    opt.aic_stopping = !a.no_aic_stop;
    config.emplace_back("boost-iters", std::to_string(opt.max_iter));
    config.emplace_back("boost-step", format_double(opt.step));
    config.emplace_back("aic-stop", opt.aic_stopping ? "true" : "false");
    BoostModel m = fit_emos_boost(train, opt);
    meta.wall_seconds = seconds_since(t0);
    meta.log = m.warnings;
    artifact = make_artifact(m, train, meta);
  } else if (a.model == "qrf") {
    QrfOptions opt = a.qrf;
    opt.seed = a.seed;
    opt.bootstrap = !a.no_bootstrap;
    config.emplace_back("trees", std::to_string(opt.n_trees));
    config.emplace_back("mtry", opt.mtry == 0 ? std::string("auto")
                                              : std::to_string(opt.mtry));
    config.emplace_back("min-leaf", std::to_string(opt.min_leaf_size));
    config.emplace_back("bootstrap", opt.bootstrap ? "true" : "false");
    QrfModel m = fit_qrf(train, opt);
    meta.wall_seconds = seconds_since(t0);
    artifact = make_artifact(m, train, meta);
  } else {
    NetworkConfig cfg = a.net;
    cfg.variant = variant_from_name(a.model);  // UsageError on unknown name
    cfg.seed = a.seed;
    config.emplace_back("hidden", std::to_string(cfg.hidden_nodes));
    config.emplace_back("emb-dim", std::to_string(cfg.n_emb));
    config.emplace_back("epochs", std::to_string(cfg.epochs));
    config.emplace_back("batch", std::to_string(cfg.batch_size));
    config.emplace_back("lr", format_double(cfg.learning_rate));
    config.emplace_back("runs", std::to_string(cfg.run_count));
    config.emplace_back("patience", std::to_string(cfg.patience));
    config.emplace_back("holdout", format_double(cfg.holdout_fraction));
    NetworkModel m = train_network_model(train, cfg);
    meta.wall_seconds = seconds_since(t0);
    for (const auto& d : m.diagnostics) {
      meta.log.push_back("run best epoch " + std::to_string(d.best_epoch) + "/" +
                         std::to_string(d.epochs_run) + ", holdout CRPS " +
                         format_double(d.best_holdout_crps));
    }
    artifact = make_artifact(m, train, meta);
  }

  save_artifact(artifact, a.out);
  if (a.show_config) print_config("train", config);
  std::cout << "trained " << a.model << " on " << train.samples.size()
            << " samples in " << cell_fixed(artifact.meta.wall_seconds, 2)
            << " s; artifact: " << a.out << "\n";
  for (const auto& line : artifact.meta.log) std::cout << "  " << line << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string artifact;
  std::string data;
  std::string out;
  bool show_config = false;
};

int run_predict(const PredictArgs& a) {
  const ModelArtifact artifact = load_artifact(a.artifact);
  const LoadResult loaded = load_csv(a.data);
  const ForecastDataset& ds = loaded.data;
  if (artifact.features.names != ds.features.names) {
    throw GridMismatchError("artifact was fitted on a different feature spec");
  }

  std::string out;
  if (artifact_is_quantile_family(artifact)) {
    const std::vector<double> levels = default_quantile_levels();
    out = "station_id,valid_time";
    for (std::size_t k = 1; k <= levels.size(); ++k) {
      out += ",q" + std::to_string(k);
    }
    out += '\n';
    for (const auto& s : ds.samples) {
      const QuantileForecast f = artifact_predict_quantiles(artifact, s, levels);
      out += ds.stations[static_cast<std::size_t>(s.station_index)].id;
      out += ',';
      out += format_date(s.valid_time);
      for (const double v : f.values) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
  } else {
    out = "station_id,valid_time,mu,sigma\n";
    for (const auto& s : ds.samples) {
      const GaussianForecast f = artifact_predict_gaussian(artifact, s);
      out += ds.stations[static_cast<std::size_t>(s.station_index)].id;
      out += ',';
      out += format_date(s.valid_time);
      out += ',';
      out += format_double(f.mu);
      out += ',';
      out += format_double(f.sigma);
      out += '\n';
    }
  }
  write_file_atomic(a.out, out);
  if (a.show_config) {
    print_config("predict",
                 {{"artifact", a.artifact}, {"data", a.data}, {"out", a.out}});
  }
  std::cout << "wrote " << ds.samples.size() << " predictions (" << artifact.family
            << ") to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::vector<std::string> artifacts;
  std::string data;
  std::string out_dir;
  std::vector<std::string> references;
  double alpha = 0.05;
  std::uint64_t rank_seed = 1;
  bool importance = false;
  std::uint64_t importance_seed = 1;
  bool show_config = false;
};

int run_evaluate(const EvaluateArgs& a) {
  const LoadResult loaded = load_csv(a.data);
  const ForecastDataset& valid = loaded.data;

  std::vector<ModelArtifact> artifacts;
  artifacts.reserve(a.artifacts.size());
  for (const auto& path : a.artifacts) artifacts.push_back(load_artifact(path));

  const EvaluationReport report =
      evaluate_artifacts(artifacts, valid, a.references, a.alpha, a.rank_seed);

  std::vector<std::string> written = write_evaluation_files(report, a.out_dir);
  if (a.importance) {
    const PermutationPlan plan =
        make_permutation_plan(valid.samples.size(), a.importance_seed);
    const std::size_t first_model = report.models.size() - artifacts.size();
    for (std::size_t k = 0; k < artifacts.size(); ++k) {
      ImportanceReport imp =
          permutation_importance(artifact_scorer(artifacts[k], valid),
                                 report.models[first_model + k].name, valid, plan);
      for (auto& path : write_importance_files(imp, a.out_dir)) {
        written.push_back(std::move(path));
      }
    }
  }

  if (a.show_config) {
    ConfigLines lines{{"data", a.data},
                      {"out-dir", a.out_dir},
                      {"alpha", format_double(a.alpha)},
                      {"rank-seed", std::to_string(a.rank_seed)},
                      {"importance", a.importance ? "true" : "false"},
                      {"importance-seed", std::to_string(a.importance_seed)}};
    for (const auto& p : a.artifacts) lines.emplace_back("artifact", p);
    for (const auto& r : a.references) lines.emplace_back("reference", r);
    print_config("evaluate", lines);
  }

  std::cout << overall_crps_table(report).to_text();
  std::cout << "wrote " << written.size() << " report files to " << a.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// importance

struct ImportanceArgs {
  std::string artifact;
  std::string data;
  std::string out_dir;
  std::uint64_t seed = 1;
  bool show_config = false;
};

int run_importance(const ImportanceArgs& a) {
  const ModelArtifact artifact = load_artifact(a.artifact);
  const LoadResult loaded = load_csv(a.data);
  const ForecastDataset& valid = loaded.data;

  const ImportanceReport report = permutation_importance(
      artifact_scorer(artifact, valid), artifact.family, valid,
      make_permutation_plan(valid.samples.size(), a.seed));

  const auto written = write_importance_files(report, a.out_dir);
  if (a.show_config) {
    print_config("importance", {{"artifact", a.artifact},
                                {"data", a.data},
                                {"out-dir", a.out_dir},
                                {"seed", std::to_string(a.seed)}});
  }
  std::cout << importance_table(report).to_text();
  std::cout << "wrote " << written.size() << " files to " << a.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eppc: ensemble weather forecast post-processing toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cmd_gen =
      app.add_subcommand("generate", "write a synthetic forecast archive as CSV");
  cmd_gen->add_option("--out", gen.out, "output CSV path")->required();
  cmd_gen->add_option("--stations", gen.cfg.stations, "number of stations")->capture_default_str();
  cmd_gen->add_option("--days", gen.cfg.days, "number of days")->capture_default_str();
  cmd_gen->add_option("--members", gen.cfg.members, "ensemble members")->capture_default_str();
  cmd_gen->add_option("--seed", gen.cfg.seed, "generator seed")->capture_default_str();
  cmd_gen->add_option("--start", gen.start, "first valid date (YYYY-MM-DD)")->capture_default_str();
  cmd_gen->add_option("--bias", gen.cfg.bias_amplitude,
                      "linear predictor-driven forecast bias")->capture_default_str();
  cmd_gen->add_option("--nonlinearity", gen.cfg.nonlinearity_amplitude,
                      "station-interacting nonlinear bias")->capture_default_str();
  cmd_gen->add_option("--station-bias", gen.cfg.station_bias_scale,
                      "sd of constant per-station bias")->capture_default_str();
  cmd_gen->add_option("--underdispersion", gen.cfg.underdispersion,
                      "member spread / truth spread, in (0,1]")->capture_default_str();
  cmd_gen->add_option("--noise", gen.cfg.noise_scale,
                      "sd of the unpredictable component")->capture_default_str();

  TrainArgs tr;
  CLI::App* cmd_tr = app.add_subcommand("train", "fit a model and save an artifact");
  cmd_tr->add_option("--model", tr.model, "one of: emos-gl emos-loc emos-loc-bst qrf fcn fcn-aux fcn-emb fcn-aux-emb nn-aux nn-aux-emb")
      ->required();
  cmd_tr->add_option("--data", tr.data, "training CSV")->required();
  cmd_tr->add_option("--out", tr.out, "artifact path")->required();
  cmd_tr->add_option("--seed", tr.seed, "fitting seed")->capture_default_str();
  cmd_tr->add_option("--boost-iters", tr.boost.max_iter,
                     "boosting: maximum iterations")->capture_default_str();
  cmd_tr->add_option("--boost-step", tr.boost.step, "boosting: step size")->capture_default_str();
  cmd_tr->add_flag("--no-aic-stop", tr.no_aic_stop,
                   "boosting: disable early stopping");
  cmd_tr->add_option("--trees", tr.qrf.n_trees, "forest: trees per station")->capture_default_str();
  cmd_tr->add_option("--mtry", tr.qrf.mtry,
                     "forest: candidate predictors per split (0 = half)")->capture_default_str();
  cmd_tr->add_option("--min-leaf", tr.qrf.min_leaf_size, "forest: minimum leaf size")->capture_default_str();
  cmd_tr->add_flag("--no-bootstrap", tr.no_bootstrap,
                   "forest: grow every tree on the full sample");
  cmd_tr->add_option("--hidden", tr.net.hidden_nodes, "network: hidden width")->capture_default_str();
  cmd_tr->add_option("--emb-dim", tr.net.n_emb, "network: embedding dimensions")->capture_default_str();
  cmd_tr->add_option("--epochs", tr.net.epochs, "network: training epochs")->capture_default_str();
  cmd_tr->add_option("--batch", tr.net.batch_size, "network: batch size")->capture_default_str();
  cmd_tr->add_option("--lr", tr.net.learning_rate, "network: learning rate")->capture_default_str();
  cmd_tr->add_option("--runs", tr.net.run_count, "network: ensemble members")->capture_default_str();
  cmd_tr->add_option("--patience", tr.net.patience,
                     "network: early-stopping patience")->capture_default_str();
  cmd_tr->add_option("--holdout", tr.net.holdout_fraction,
                     "network: early-stopping holdout fraction")->capture_default_str();
  cmd_tr->add_flag("--print-config", tr.show_config, "echo the resolved settings");

  PredictArgs pr;
  CLI::App* cmd_pr =
      app.add_subcommand("predict", "write per-sample predictions as CSV");
  cmd_pr->add_option("--artifact", pr.artifact, "fitted model artifact")->required();
  cmd_pr->add_option("--data", pr.data, "input CSV")->required();
  cmd_pr->add_option("--out", pr.out, "output CSV path")->required();
  cmd_pr->add_flag("--print-config", pr.show_config, "echo the resolved settings");

  EvaluateArgs ev;
  CLI::App* cmd_ev = app.add_subcommand(
      "evaluate", "score artifacts (and the raw ensemble) on a validation CSV");
  cmd_ev->add_option("--artifact", ev.artifacts, "artifact path (repeatable)");
  cmd_ev->add_option("--data", ev.data, "validation CSV")->required();
  cmd_ev->add_option("--out-dir", ev.out_dir, "report directory")->required();
  cmd_ev->add_option("--reference", ev.references,
                     "model name used as CRPSS reference (repeatable)");
  cmd_ev->add_option("--alpha", ev.alpha, "significance level")->capture_default_str();
  cmd_ev->add_option("--rank-seed", ev.rank_seed, "rank-histogram tie-break seed")->capture_default_str();
  cmd_ev->add_flag("--importance", ev.importance,
                   "also write permutation-importance tables");
  cmd_ev->add_option("--importance-seed", ev.importance_seed,
                     "permutation seed for --importance")->capture_default_str();
  cmd_ev->add_flag("--print-config", ev.show_config, "echo the resolved settings");

  ImportanceArgs im;
  CLI::App* cmd_im = app.add_subcommand(
      "importance", "permutation feature importance for one artifact");
  cmd_im->add_option("--artifact", im.artifact, "fitted model artifact")->required();
  cmd_im->add_option("--data", im.data, "validation CSV")->required();
  cmd_im->add_option("--out-dir", im.out_dir, "report directory")->required();
  cmd_im->add_option("--seed", im.seed, "permutation seed")->capture_default_str();
  cmd_im->add_flag("--print-config", im.show_config, "echo the resolved settings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(cmd_gen)) return run_generate(gen);
    if (app.got_subcommand(cmd_tr)) return run_train(tr);
    if (app.got_subcommand(cmd_pr)) return run_predict(pr);
    if (app.got_subcommand(cmd_ev)) return run_evaluate(ev);
    if (app.got_subcommand(cmd_im)) return run_importance(im);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
