#pragma once

#include <optional>
#include <string>

#include "plants.hpp"
#include "reservoir.hpp"
#include "signal.hpp"
#include "types.hpp"

namespace rcc {

// Time scales of one training/control experiment (all in plant time units).
struct ControlTimescales {
  double delta = 0.1;    // control look-ahead
  double t_init = 10.0;  // reservoir transient discarded before the fit
  double t_train = 100.0;
  double t_test = 0.0;   // open-loop evaluation window; 0 -> t_train / 3
  double beta = 1e-8;    // Tikhonov parameter

  double test_window() const { return t_test > 0 ? t_test : t_train / 3.0; }
  void validate() const {
    require(delta > 0, "timescales: delta must be positive");
    require(t_init >= 0 && t_init < t_train,
            "timescales: need 0 <= T_init < T_train");
    require(beta >= 0, "timescales: beta must be non-negative");
  }
};

// Aligned training triplets (y(t), y(t+delta), v_train(t)) sampled at the
// integration step over one harvest, plus the discard horizon.
struct TrainingRecord {
  double h = 0.0;
  double delta = 0.0;
  long shift_steps = 0;   // delta / h
  long discard = 0;       // samples before T_init
  long train_end = 0;     // last triplet index inside the training window
  Mat y;                  // m x n_nodes, full harvested trace
  Mat v;                  // l x n_nodes, applied perturbation

  long nodes() const { return y.cols(); }
  // triplets exist wherever y(t + delta) is available
  long triplets() const { return y.cols() - shift_steps; }

  Vec y_at(long i) const { return y.col(i); }
  Vec y_shifted_at(long i) const { return y.col(i + shift_steps); }
  Vec v_at(long i) const { return v.col(i); }

  void export_csv(const std::string& path) const;
  static TrainingRecord import_csv(const std::string& path);
};

// Drive the plant open loop with v_train over [0, duration + delta] and
// collect the aligned triplets (Fig.-1a-style training configuration).
// `duration` defaults to t_train + test window.  The plant is assumed to be
// on its attractor already (run a burn-in first).
TrainingRecord harvest(Plant& plant, const SampledSignal& signal,
                       const ControlTimescales& times,
                       std::optional<double> duration = std::nullopt);

struct TrainDiagnostics {
  double train_nrmse = 0.0;      // replay error on [T_init, T_train]
  double test_nrmse = 0.0;       // open-loop error on [T_train, +T_test]
  double test_nrmse_var_v = 0.0; // same but normalized by var of the replayed v
  double w_out_max_abs = 0.0;
  Vec final_state;               // reservoir state at the end of the record
};

struct TrainOptions {
  // Measurement-noise hook: white noise of this std is added to the recorded
  // observables before they drive the reservoir (never to the targets).
  double measurement_noise = 0.0;
  uint64_t noise_seed = 0;
};

// Integrate the reservoir against the recorded (y(t), y(t+delta)) pair from
// a zero state, collect states over [T_init, T_train], and solve the
// Tikhonov system for W_out.  States never materialize as a matrix; normal
// equations are accumulated on the fly.
TrainDiagnostics train_readout(Esn& esn, const TrainingRecord& record,
                               double beta, const TrainOptions& opts = {});

// Replay the record through a trained readout, streaming v_hat; used for
// artifact export.
Mat replay_readout(const Esn& esn, const TrainingRecord& record,
                   const TrainOptions& opts = {});

// Normalized inversion error between two aligned signals on a window
// [i0, i1] (inclusive), trapezoidal:
//   sqrt( integral |v - v_train|^2 dt / (T var(v_train)) ).
double inversion_error(const Mat& v, const Mat& v_train, double h, long i0,
                       long i1);

}  // namespace rcc
