#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epp/data.hpp"
#include "epp/scoring.hpp"

namespace epp {

// Feed-forward post-processing networks: linear (FCN) or one ReLU hidden
// layer (NN), optional station embeddings, optional full predictor set
// ("aux"), two linear outputs (mu_raw, sigma_raw), trained on Gaussian CRPS
// with Adam, seeded 20% holdout early stopping, and run ensembling.
enum class NetVariant {
  fcn,
  fcn_aux,
  fcn_emb,
  fcn_aux_emb,
  nn_aux,
  nn_aux_emb,
};

bool variant_uses_aux(NetVariant v);
bool variant_uses_embedding(NetVariant v);
bool variant_has_hidden(NetVariant v);
std::string variant_name(NetVariant v);
NetVariant variant_from_name(const std::string& name);

struct NetworkConfig {
  NetVariant variant = NetVariant::nn_aux_emb;
  int hidden_nodes = 32;  // ignored (0) for FCN variants
  int n_emb = 2;          // ignored (0) for non-embedding variants
  int epochs = 30;
  double learning_rate = 0.01;
  int batch_size = 256;
  int run_count = 10;
  std::uint64_t seed = 1;
  double holdout_fraction = 0.2;
  int patience = 3;
};

// One flat parameter vector plus the layout needed to interpret it:
// [embeddings S*n_emb][w1 hidden*d][b1 hidden][w2 2*(hidden or d)][b2 2]
// where d = n_inputs + n_emb.
struct NetworkParams {
  NetVariant variant = NetVariant::fcn;
  int n_inputs = 0;
  int hidden = 0;  // 0: linear model
  int n_emb = 0;
  int n_stations = 0;
  std::vector<double> theta;

  int input_dim() const { return n_inputs + n_emb; }
  int emb_offset() const { return 0; }
  int w1_offset() const { return n_stations * n_emb; }
  int b1_offset() const { return w1_offset() + hidden * input_dim(); }
  int w2_offset() const { return b1_offset() + hidden; }
  int b2_offset() const {
    return w2_offset() + 2 * (hidden > 0 ? hidden : input_dim());
  }
  int size() const { return b2_offset() + 2; }
};

// Closed-form size of the flat vector for an architecture; the audit tests
// pin this against the reference configuration.
int network_parameter_count(NetVariant variant, int n_stations, int aux_inputs,
                            int hidden, int n_emb);

NetworkParams init_network_params(NetVariant variant, int n_inputs, int hidden,
                                  int n_emb, int n_stations, std::uint64_t seed);

// One training sample on the network's input scale.
struct NetSample {
  std::vector<double> x;
  int station = 0;
  double y = 0.0;
};

GaussianForecast net_forward(const NetworkParams& p, const std::vector<double>& x,
                             int station);
double net_batch_crps(const NetworkParams& p, const std::vector<NetSample>& batch);
// Gradient of the mean batch CRPS for every entry of theta.
std::vector<double> net_batch_grad(const NetworkParams& p,
                                   const std::vector<NetSample>& batch);

struct AdamState {
  std::vector<double> m, v;
  long step_count = 0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};
void adam_step(std::vector<double>& theta, const std::vector<double>& grad,
               AdamState& state, double learning_rate);

struct TrainDiagnostics {
  int epochs_run = 0;
  int best_epoch = 0;  // 1-based
  double best_holdout_crps = 0.0;
  std::vector<double> holdout_history;
};

struct NetworkModel {
  NetworkConfig config;
  std::vector<int> input_indices;  // predictor columns fed to the network
  std::vector<double> input_mean;  // training standardization
  std::vector<double> input_sd;
  std::vector<NetworkParams> runs;
  std::vector<TrainDiagnostics> diagnostics;
};

// Trains config.run_count members with seeds seed, seed+1, ... and returns
// them all; prediction averages (mu, sigma) arithmetically across members.
NetworkModel train_network_model(const ForecastDataset& train, NetworkConfig config);

GaussianForecast predict_network(const NetworkModel& model, const Sample& sample);

}  // namespace epp
