#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rng.hpp"
#include "types.hpp"

namespace rcc {

struct EsnHyperparams {
  int n_nodes = 100;            // N
  double spectral_radius = 1.0; // rho, target after rescaling W
  double mean_degree = 10;      // k: each entry nonzero with probability k/N
  double input_scale = 1.0;     // sigma, W_in entries uniform in [-sigma, sigma]
  double bias_mean = 0.0;       // b_mean
  double bias_halfrange = 1.0;  // b_max
  double time_constant = 1.0;   // c
  uint64_t seed = 0;

  void validate() const;
};

// One reservoir layer: fixed random weights, bias, time constant, and a
// readout trained elsewhere.  Value type; the integration state `u` lives
// here and is mutated only by its owner.
class Esn {
public:
  // Draw W (sparse, Bernoulli k/N entries uniform in [-1,1], rescaled to the
  // target spectral radius), dense input weights for the observable and
  // reference channels, and the bias.  A pathological all-zero draw is
  // redrawn from the next seed stream; the provenance records how many.
  static Esn instantiate(const EsnHyperparams& params, int obs_dim,
                         int input_dim);

  // du/dt = (-u + tanh(W u + W_in_y y + W_in_r r_delta + b)) / c
  void derivative(const Vec& u, const Vec& y, const Vec& r_delta,
                  Vec& out) const;

  // v = W_out u; requires a trained readout
  Vec readout() const;
  void readout_into(const Vec& u, Vec& out) const;

  void reset() { state_.setZero(); }

  const EsnHyperparams& params() const { return params_; }
  int n_nodes() const { return params_.n_nodes; }
  int obs_dim() const { return obs_dim_; }
  int input_dim() const { return input_dim_; }
  double time_constant() const { return params_.time_constant; }

  const SpMat& w() const { return w_; }
  const Mat& w_in_y() const { return w_in_y_; }
  const Mat& w_in_r() const { return w_in_r_; }
  const Vec& bias() const { return bias_; }

  bool trained() const { return w_out_.has_value(); }
  const Mat& w_out() const;
  void set_w_out(Mat w);

  Vec& state() { return state_; }
  const Vec& state() const { return state_; }

  int redraws() const { return redraws_; }

  // self-describing JSON (hyperparams, seed, weights, optional readout)
  std::string to_json() const;
  static Esn from_json(const std::string& text);
  void save(const std::string& path) const;
  static Esn load(const std::string& path);

private:
  Esn() = default;

  EsnHyperparams params_;
  int obs_dim_ = 0, input_dim_ = 0;
  SpMat w_;
  Mat w_in_y_, w_in_r_;
  Vec bias_;
  Vec state_;
  std::optional<Mat> w_out_;
  int redraws_ = 0;
};

}  // namespace rcc
