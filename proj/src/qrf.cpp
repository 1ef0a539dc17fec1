#include "epp/qrf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epp/errors.hpp"
#include "epp/rng.hpp"

namespace epp {

std::vector<double> default_quantile_levels() {
  std::vector<double> levels;
  for (int k = 1; k <= 51; ++k) levels.push_back(static_cast<double>(k) / 52.0);
  return levels;
}

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& cols;
  const std::vector<double>& obs;
  int mtry;
  int min_leaf;
  Rng& rng;
  QrfTree& tree;
  std::vector<std::pair<double, double>> scratch;  // (x, y) sorted per feature

  int make_leaf(const std::vector<int>& idx) {
    const int node_id = static_cast<int>(tree.nodes.size());
    QrfNode node;
    node.leaf_begin = static_cast<int>(tree.leaf_values.size());
    for (int i : idx) tree.leaf_values.push_back(obs[i]);
    std::sort(tree.leaf_values.begin() + node.leaf_begin, tree.leaf_values.end());
    node.leaf_end = static_cast<int>(tree.leaf_values.size());
    tree.nodes.push_back(node);
    return node_id;
  }

  int build(const std::vector<int>& idx) {
    const std::size_t m = idx.size();
    double sy = 0.0, syy = 0.0;
    for (int i : idx) {
      sy += obs[i];
      syy += obs[i] * obs[i];
    }
    const double total_sse = syy - sy * sy / static_cast<double>(m);
    if (m < 2 * static_cast<std::size_t>(min_leaf) || total_sse <= 1e-12) {
      return make_leaf(idx);
    }

    const std::vector<std::size_t> feats =
        rng.sample_without_replacement(cols.size(), static_cast<std::size_t>(mtry));
    int best_feature = -1;
    double best_threshold = 0.0, best_sse = total_sse + 1.0;
    for (const std::size_t f : feats) {
      scratch.clear();
      for (int i : idx) scratch.emplace_back(cols[f][i], obs[i]);
      std::sort(scratch.begin(), scratch.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double lsy = 0.0, lsyy = 0.0;
      for (std::size_t s = 1; s < m; ++s) {
        lsy += scratch[s - 1].second;
        lsyy += scratch[s - 1].second * scratch[s - 1].second;
        if (scratch[s - 1].first == scratch[s].first) continue;
        if (s < static_cast<std::size_t>(min_leaf) ||
            m - s < static_cast<std::size_t>(min_leaf)) {
          continue;
        }
        const double rn = static_cast<double>(m - s);
        const double rsy = sy - lsy;
        const double rsyy = syy - lsyy;
        const double sse = (lsyy - lsy * lsy / static_cast<double>(s)) +
                           (rsyy - rsy * rsy / rn);
        if (sse < best_sse) {
          best_sse = sse;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (scratch[s - 1].first + scratch[s].first);
        }
      }
    }
    if (best_feature < 0) return make_leaf(idx);

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
      (cols[best_feature][i] <= best_threshold ? left_idx : right_idx).push_back(i);
    }

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].threshold = best_threshold;
    const int left = build(left_idx);
    const int right = build(right_idx);
    tree.nodes[node_id].left = left;
    tree.nodes[node_id].right = right;
    return node_id;
  }
};

}  // namespace

std::vector<QrfTree> fit_qrf_station(const std::vector<std::vector<double>>& columns,
                                     const std::vector<double>& obs,
                                     const QrfOptions& options,
                                     std::uint64_t station_seed) {
  const std::size_t n = obs.size();
  if (n == 0) throw EmptyDatasetError("qrf: station has no samples");
  std::vector<QrfTree> trees(static_cast<std::size_t>(options.n_trees));
  const Rng station_rng(station_seed);
  for (int t = 0; t < options.n_trees; ++t) {
    Rng tree_rng = station_rng.fork(static_cast<std::uint64_t>(t));
    std::vector<int> idx(n);
    if (options.bootstrap) {
      for (auto& i : idx) i = static_cast<int>(tree_rng.index(n));
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    QrfTree& tree = trees[static_cast<std::size_t>(t)];
    TreeBuilder builder{columns, obs, options.mtry, options.min_leaf_size,
                        tree_rng, tree, {}};
    builder.build(idx);
  }
  return trees;
}

QrfModel fit_qrf(const ForecastDataset& train, const QrfOptions& options) {
  if (train.samples.empty()) throw EmptyDatasetError("fit_qrf: no samples");
  if (options.n_trees < 1 || options.min_leaf_size < 1) {
    throw UsageError("fit_qrf: n_trees and min_leaf_size must be positive");
  }
  const int p = static_cast<int>(train.features.count());
  QrfModel model;
  model.options = options;
  model.predictor_count = p;
  if (model.options.mtry <= 0) model.options.mtry = (p + 1) / 2;
  model.options.mtry = std::min(model.options.mtry, p);

  const Rng base(options.seed);
  const std::size_t n_st = train.stations.size();
  model.per_station.resize(n_st);
  for (std::size_t st = 0; st < n_st; ++st) {
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(p));
    std::vector<double> obs;
    for (const auto& s : train.samples) {
      if (s.station_index != static_cast<int>(st)) continue;
      obs.push_back(s.obs);
      for (int j = 0; j < p; ++j) {
        cols[static_cast<std::size_t>(j)].push_back(s.predictors[j]);
      }
    }
    if (obs.size() < 2 * static_cast<std::size_t>(model.options.min_leaf_size)) {
      throw TooFewSamplesError(
          "fit_qrf: station " + train.stations[st].id + " needs >= " +
          std::to_string(2 * model.options.min_leaf_size) + " samples, got " +
          std::to_string(obs.size()));
    }
    model.per_station[st] =
        fit_qrf_station(cols, obs, model.options, base.fork(st).seed());
  }
  return model;
}

const QrfNode& route_to_leaf(const QrfTree& tree, const std::vector<double>& x) {
  const QrfNode* node = &tree.nodes[0];
  while (node->feature >= 0) {
    node = &tree.nodes[x[static_cast<std::size_t>(node->feature)] <= node->threshold
                           ? node->left
                           : node->right];
  }
  return *node;
}

QuantileForecast predict_quantiles(const QrfModel& model, std::size_t station_index,
                                   const std::vector<double>& x,
                                   const std::vector<double>& levels) {
  if (station_index >= model.per_station.size()) {
    throw UnknownStationError("predict_quantiles: station index out of range");
  }
  if (x.size() != static_cast<std::size_t>(model.predictor_count)) {
    throw DimensionMismatchError("predict_quantiles: predictor length mismatch");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0) ||
        (i > 0 && levels[i] <= levels[i - 1])) {
      throw UsageError("predict_quantiles: levels must be strictly increasing in (0,1)");
    }
  }

  const auto& trees = model.per_station[station_index];
  std::vector<std::pair<double, double>> weighted;  // (value, probability mass)
  const double tree_w = 1.0 / static_cast<double>(trees.size());
  for (const auto& tree : trees) {
    const QrfNode& leaf = route_to_leaf(tree, x);
    const double w = tree_w / static_cast<double>(leaf.leaf_end - leaf.leaf_begin);
    for (int i = leaf.leaf_begin; i < leaf.leaf_end; ++i) {
      weighted.emplace_back(tree.leaf_values[static_cast<std::size_t>(i)], w);
    }
  }
  std::sort(weighted.begin(), weighted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  QuantileForecast out;
  out.levels = levels;
  out.values.reserve(levels.size());
  double cum = 0.0;
  std::size_t pos = 0;
  for (const double level : levels) {
    while (pos < weighted.size() && cum + weighted[pos].second < level - 1e-12) {
      cum += weighted[pos].second;
      ++pos;
    }
    // pos now points at the first atom whose cumulative mass reaches `level`.
    out.values.push_back(pos < weighted.size() ? weighted[pos].first
                                               : weighted.back().first);
  }
  return out;
}

QuantileForecast predict_quantiles(const QrfModel& model, const Sample& sample,
                                   const std::vector<double>& levels) {
  return predict_quantiles(model, static_cast<std::size_t>(sample.station_index),
                           sample.predictors, levels);
}

}  // namespace epp
