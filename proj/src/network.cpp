#include "epp/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "epp/errors.hpp"
#include "epp/rng.hpp"

namespace epp {

bool variant_uses_aux(NetVariant v) {
  return v == NetVariant::fcn_aux || v == NetVariant::fcn_aux_emb ||
         v == NetVariant::nn_aux || v == NetVariant::nn_aux_emb;
}

bool variant_uses_embedding(NetVariant v) {
  return v == NetVariant::fcn_emb || v == NetVariant::fcn_aux_emb ||
         v == NetVariant::nn_aux_emb;
}

bool variant_has_hidden(NetVariant v) {
  return v == NetVariant::nn_aux || v == NetVariant::nn_aux_emb;
}

std::string variant_name(NetVariant v) {
  switch (v) {
    case NetVariant::fcn: return "fcn";
    case NetVariant::fcn_aux: return "fcn-aux";
    case NetVariant::fcn_emb: return "fcn-emb";
    case NetVariant::fcn_aux_emb: return "fcn-aux-emb";
    case NetVariant::nn_aux: return "nn-aux";
    case NetVariant::nn_aux_emb: return "nn-aux-emb";
  }
  throw UsageError("unknown network variant");
}

NetVariant variant_from_name(const std::string& name) {
  for (NetVariant v : {NetVariant::fcn, NetVariant::fcn_aux, NetVariant::fcn_emb,
                       NetVariant::fcn_aux_emb, NetVariant::nn_aux,
                       NetVariant::nn_aux_emb}) {
    if (variant_name(v) == name) return v;
  }
  throw UsageError("unknown network variant: " + name);
}

int network_parameter_count(NetVariant variant, int n_stations, int aux_inputs,
                            int hidden, int n_emb) {
  const int inputs = variant_uses_aux(variant) ? aux_inputs : 2;
  const int ne = variant_uses_embedding(variant) ? n_emb : 0;
  const int d = inputs + ne;
  const int h = variant_has_hidden(variant) ? hidden : 0;
  int count = variant_uses_embedding(variant) ? n_stations * ne : 0;
  if (h > 0) {
    count += h * d + h + 2 * h + 2;
  } else {
    count += 2 * d + 2;
  }
  return count;
}

NetworkParams init_network_params(NetVariant variant, int n_inputs, int hidden,
                                  int n_emb, int n_stations, std::uint64_t seed) {
  NetworkParams p;
  p.variant = variant;
  p.n_inputs = n_inputs;
  p.hidden = variant_has_hidden(variant) ? hidden : 0;
  p.n_emb = variant_uses_embedding(variant) ? n_emb : 0;
  p.n_stations = variant_uses_embedding(variant) ? n_stations : 0;
  p.theta.assign(static_cast<std::size_t>(p.size()), 0.0);

  Rng rng(seed);
  for (int i = 0; i < p.n_stations * p.n_emb; ++i) {
    p.theta[static_cast<std::size_t>(p.emb_offset() + i)] = rng.uniform(-0.05, 0.05);
  }
  const int d = p.input_dim();
  const double w1_scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < p.hidden * d; ++i) {
    p.theta[static_cast<std::size_t>(p.w1_offset() + i)] =
        rng.uniform(-1.0, 1.0) * w1_scale;
  }
  const int out_fan = p.hidden > 0 ? p.hidden : d;
  const double w2_scale = 1.0 / std::sqrt(static_cast<double>(out_fan));
  for (int i = 0; i < 2 * out_fan; ++i) {
    p.theta[static_cast<std::size_t>(p.w2_offset() + i)] =
        rng.uniform(-1.0, 1.0) * w2_scale;
  }
  // Spread-output bias starts at one so initial forecasts are not pinned to
  // the sigma floor.
  p.theta[static_cast<std::size_t>(p.b2_offset() + 1)] = 1.0;
  return p;
}

namespace {

struct Workspace {
  std::vector<double> v;    // concatenated input
  std::vector<double> act;  // hidden pre-activations
  std::vector<double> hid;  // hidden outputs
  std::vector<double> dact;

  void resize(const NetworkParams& p) {
    v.resize(static_cast<std::size_t>(p.input_dim()));
    act.resize(static_cast<std::size_t>(p.hidden));
    hid.resize(static_cast<std::size_t>(p.hidden));
    dact.resize(static_cast<std::size_t>(p.hidden));
  }
};

struct Outputs {
  double mu = 0.0;
  double s_raw = 0.0;
  double sigma = kSigmaFloor;
};

Outputs forward_ws(const NetworkParams& p, const double* x, int station,
                   Workspace& ws) {
  const int d = p.input_dim();
  for (int i = 0; i < p.n_inputs; ++i) ws.v[static_cast<std::size_t>(i)] = x[i];
  if (p.n_emb > 0) {
    if (station < 0 || station >= p.n_stations) {
      throw UnknownStationError("network: station index outside embedding table");
    }
    const double* row = p.theta.data() + p.emb_offset() + station * p.n_emb;
    for (int e = 0; e < p.n_emb; ++e) {
      ws.v[static_cast<std::size_t>(p.n_inputs + e)] = row[e];
    }
  }

  const double* theta = p.theta.data();
  Outputs out;
  if (p.hidden > 0) {
    const double* w1 = theta + p.w1_offset();
    const double* b1 = theta + p.b1_offset();
    for (int j = 0; j < p.hidden; ++j) {
      double a = b1[j];
      const double* row = w1 + j * d;
      for (int i = 0; i < d; ++i) a += row[i] * ws.v[static_cast<std::size_t>(i)];
      ws.act[static_cast<std::size_t>(j)] = a;
      ws.hid[static_cast<std::size_t>(j)] = a > 0.0 ? a : 0.0;
    }
    const double* w2 = theta + p.w2_offset();
    const double* b2 = theta + p.b2_offset();
    double o0 = b2[0], o1 = b2[1];
    for (int j = 0; j < p.hidden; ++j) {
      o0 += w2[j] * ws.hid[static_cast<std::size_t>(j)];
      o1 += w2[p.hidden + j] * ws.hid[static_cast<std::size_t>(j)];
    }
    out.mu = o0;
    out.s_raw = o1;
  } else {
    const double* w2 = theta + p.w2_offset();
    const double* b2 = theta + p.b2_offset();
    double o0 = b2[0], o1 = b2[1];
    for (int i = 0; i < d; ++i) {
      o0 += w2[i] * ws.v[static_cast<std::size_t>(i)];
      o1 += w2[d + i] * ws.v[static_cast<std::size_t>(i)];
    }
    out.mu = o0;
    out.s_raw = o1;
  }
  out.sigma = std::max(std::abs(out.s_raw), kSigmaFloor);
  return out;
}

// Adds one sample's CRPS gradient (unnormalized) into grad; returns the CRPS.
double backward_ws(const NetworkParams& p, const double* x, int station, double y,
                   Workspace& ws, std::vector<double>& grad) {
  const Outputs out = forward_ws(p, x, station, ws);
  const double crps = crps_normal(out.mu, out.sigma, y);
  const GaussianGrad g = crps_normal_grad(out.mu, out.sigma, y);
  const double d_o0 = g.d_mu;
  double d_o1 = 0.0;
  if (std::abs(out.s_raw) >= kSigmaFloor) {
    d_o1 = g.d_sigma * (out.s_raw >= 0.0 ? 1.0 : -1.0);
  }

  const int d = p.input_dim();
  const double* theta = p.theta.data();
  if (p.hidden > 0) {
    const double* w2 = theta + p.w2_offset();
    double* gw2 = grad.data() + p.w2_offset();
    double* gb2 = grad.data() + p.b2_offset();
    gb2[0] += d_o0;
    gb2[1] += d_o1;
    for (int j = 0; j < p.hidden; ++j) {
      const double h = ws.hid[static_cast<std::size_t>(j)];
      gw2[j] += d_o0 * h;
      gw2[p.hidden + j] += d_o1 * h;
      const double dh = d_o0 * w2[j] + d_o1 * w2[p.hidden + j];
      ws.dact[static_cast<std::size_t>(j)] =
          ws.act[static_cast<std::size_t>(j)] > 0.0 ? dh : 0.0;
    }
    const double* w1 = theta + p.w1_offset();
    double* gw1 = grad.data() + p.w1_offset();
    double* gb1 = grad.data() + p.b1_offset();
    for (int j = 0; j < p.hidden; ++j) {
      const double da = ws.dact[static_cast<std::size_t>(j)];
      if (da == 0.0) continue;
      gb1[j] += da;
      double* grow = gw1 + j * d;
      for (int i = 0; i < d; ++i) grow[i] += da * ws.v[static_cast<std::size_t>(i)];
    }
    if (p.n_emb > 0) {
      double* gemb = grad.data() + p.emb_offset() + station * p.n_emb;
      for (int e = 0; e < p.n_emb; ++e) {
        double dv = 0.0;
        const int col = p.n_inputs + e;
        for (int j = 0; j < p.hidden; ++j) {
          dv += ws.dact[static_cast<std::size_t>(j)] * w1[j * d + col];
        }
        gemb[e] += dv;
      }
    }
  } else {
    const double* w2 = theta + p.w2_offset();
    double* gw2 = grad.data() + p.w2_offset();
    double* gb2 = grad.data() + p.b2_offset();
    gb2[0] += d_o0;
    gb2[1] += d_o1;
    for (int i = 0; i < d; ++i) {
      const double vi = ws.v[static_cast<std::size_t>(i)];
      gw2[i] += d_o0 * vi;
      gw2[d + i] += d_o1 * vi;
    }
    if (p.n_emb > 0) {
      double* gemb = grad.data() + p.emb_offset() + station * p.n_emb;
      for (int e = 0; e < p.n_emb; ++e) {
        const int col = p.n_inputs + e;
        gemb[e] += d_o0 * w2[col] + d_o1 * w2[d + col];
      }
    }
  }
  return crps;
}

}  // namespace

GaussianForecast net_forward(const NetworkParams& p, const std::vector<double>& x,
                             int station) {
  if (x.size() != static_cast<std::size_t>(p.n_inputs)) {
    throw DimensionMismatchError("net_forward: input length mismatch");
  }
  Workspace ws;
  ws.resize(p);
  const Outputs out = forward_ws(p, x.data(), station, ws);
  return GaussianForecast{out.mu, out.sigma};
}

double net_batch_crps(const NetworkParams& p, const std::vector<NetSample>& batch) {
  if (batch.empty()) throw EmptyDatasetError("net_batch_crps: empty batch");
  Workspace ws;
  ws.resize(p);
  double total = 0.0;
  for (const auto& s : batch) {
    const Outputs out = forward_ws(p, s.x.data(), s.station, ws);
    total += crps_normal(out.mu, out.sigma, s.y);
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> net_batch_grad(const NetworkParams& p,
                                   const std::vector<NetSample>& batch) {
  if (batch.empty()) throw EmptyDatasetError("net_batch_grad: empty batch");
  Workspace ws;
  ws.resize(p);
  std::vector<double> grad(p.theta.size(), 0.0);
  for (const auto& s : batch) backward_ws(p, s.x.data(), s.station, s.y, ws, grad);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad) g *= inv;
  return grad;
}

void adam_step(std::vector<double>& theta, const std::vector<double>& grad,
               AdamState& state, double learning_rate) {
  if (theta.size() != grad.size() || theta.size() != state.m.size()) {
    throw DimensionMismatchError("adam_step: shape mismatch");
  }
  state.step_count += 1;
  const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / b1t;
    const double vhat = state.v[i] / b2t;
    theta[i] -= learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

namespace {

struct Prepared {
  std::vector<double> x;  // n * d, row-major standardized inputs
  std::vector<int> station;
  std::vector<double> y;
  int d = 0;
  std::size_t n = 0;
};

struct RunResult {
  NetworkParams params;
  TrainDiagnostics diag;
};

double holdout_crps(const NetworkParams& p, const Prepared& data,
                    const std::vector<std::size_t>& idx, Workspace& ws) {
  double total = 0.0;
  for (const std::size_t i : idx) {
    const Outputs out =
        forward_ws(p, data.x.data() + i * static_cast<std::size_t>(data.d),
                   data.station[i], ws);
    total += crps_normal(out.mu, out.sigma, data.y[i]);
  }
  return total / static_cast<double>(idx.size());
}

RunResult train_single_run(const NetworkConfig& cfg, const Prepared& data,
                           int n_stations, std::uint64_t seed) {
  Rng rng(seed);

  // Seeded holdout split for early stopping.
  std::vector<std::size_t> order(data.n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const std::size_t n_hold =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   cfg.holdout_fraction *
                                   static_cast<double>(data.n)));
  std::vector<std::size_t> hold_idx(order.begin(),
                                    order.begin() + static_cast<long>(n_hold));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(n_hold),
                                     order.end());

  NetworkParams params =
      init_network_params(cfg.variant, data.d, cfg.hidden_nodes, cfg.n_emb,
                          n_stations, rng.next_u64());
  AdamState adam(params.theta.size());
  Workspace ws;
  ws.resize(params);
  std::vector<double> grad(params.theta.size());

  RunResult result;
  result.diag.best_holdout_crps = std::numeric_limits<double>::infinity();
  std::vector<double> best_theta = params.theta;
  int no_improve = 0;

  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(train_idx);
    for (std::size_t start = 0; start < train_idx.size(); start += batch) {
      const std::size_t end = std::min(train_idx.size(), start + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = train_idx[b];
        loss += backward_ws(params,
                            data.x.data() + i * static_cast<std::size_t>(data.d),
                            data.station[i], data.y[i], ws, grad);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      if (!std::isfinite(loss)) {
        throw DivergedTrainingError("network training diverged at epoch " +
                                    std::to_string(epoch) + ", batch " +
                                    std::to_string(start / batch));
      }
      for (auto& g : grad) g *= inv;
      adam_step(params.theta, grad, adam, cfg.learning_rate);
    }

    const double score = holdout_crps(params, data, hold_idx, ws);
    result.diag.holdout_history.push_back(score);
    result.diag.epochs_run = epoch;
    if (score < result.diag.best_holdout_crps) {
      result.diag.best_holdout_crps = score;
      result.diag.best_epoch = epoch;
      best_theta = params.theta;
      no_improve = 0;
    } else {
      ++no_improve;
    }
    if (no_improve >= cfg.patience) break;
  }

  params.theta = std::move(best_theta);
  result.params = std::move(params);
  return result;
}

}  // namespace

NetworkModel train_network_model(const ForecastDataset& train, NetworkConfig config) {
  if (!variant_has_hidden(config.variant)) config.hidden_nodes = 0;
  if (!variant_uses_embedding(config.variant)) config.n_emb = 0;
  if (variant_has_hidden(config.variant) && config.hidden_nodes < 1) {
    throw UsageError("network: hidden layer variants need hidden_nodes >= 1");
  }
  if (variant_uses_embedding(config.variant) && config.n_emb < 1) {
    throw UsageError("network: embedding variants need n_emb >= 1");
  }
  if (config.batch_size < 1 || config.epochs < 1 || config.run_count < 1 ||
      config.learning_rate <= 0.0 || config.holdout_fraction <= 0.0 ||
      config.holdout_fraction >= 0.5 || config.patience < 0) {
    throw UsageError("network: invalid training configuration");
  }
  if (train.samples.size() < 10 * static_cast<std::size_t>(config.batch_size)) {
    throw TooFewSamplesError("network: need >= 10*batch_size samples, got " +
                             std::to_string(train.samples.size()));
  }

  NetworkModel model;
  model.config = config;
  if (variant_uses_aux(config.variant)) {
    for (std::size_t j = 0; j < train.features.count(); ++j) {
      model.input_indices.push_back(static_cast<int>(j));
    }
  } else {
    const int im = train.features.index_of("t2m_mean");
    const int is = train.features.index_of("t2m_std");
    if (im < 0 || is < 0) {
      throw MissingColumnError("network: dataset lacks t2m_mean/t2m_std");
    }
    model.input_indices = {im, is};
  }

  const std::size_t d = model.input_indices.size();
  const std::size_t n = train.samples.size();
  model.input_mean.assign(d, 0.0);
  model.input_sd.assign(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    const int src = model.input_indices[j];
    double mean = 0.0;
    for (const auto& s : train.samples) mean += s.predictors[src];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& s : train.samples) {
      const double dv = s.predictors[src] - mean;
      ss += dv * dv;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    model.input_mean[j] = mean;
    model.input_sd[j] = sd < 1e-8 ? 1.0 : sd;
  }

  Prepared data;
  data.d = static_cast<int>(d);
  data.n = n;
  data.x.resize(n * d);
  data.station.resize(n);
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = train.samples[i];
    for (std::size_t j = 0; j < d; ++j) {
      data.x[i * d + j] =
          (s.predictors[model.input_indices[j]] - model.input_mean[j]) /
          model.input_sd[j];
    }
    data.station[i] = s.station_index;
    data.y[i] = s.obs;
  }

  const int n_stations = static_cast<int>(train.stations.size());
  for (int run = 0; run < config.run_count; ++run) {
    RunResult r = train_single_run(config, data, n_stations,
                                   config.seed + static_cast<std::uint64_t>(run));
    model.runs.push_back(std::move(r.params));
    model.diagnostics.push_back(std::move(r.diag));
  }
  return model;
}

GaussianForecast predict_network(const NetworkModel& model, const Sample& sample) {
  std::vector<double> x(model.input_indices.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = (sample.predictors[model.input_indices[j]] - model.input_mean[j]) /
           model.input_sd[j];
  }
  double mu = 0.0, sigma = 0.0;
  for (const auto& run : model.runs) {
    const GaussianForecast f = net_forward(run, x, sample.station_index);
    mu += f.mu;
    sigma += f.sigma;
  }
  const double inv = 1.0 / static_cast<double>(model.runs.size());
  return GaussianForecast{mu * inv, sigma * inv};
}

}  // namespace epp
