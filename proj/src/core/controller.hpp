#pragma once

#include <optional>
#include <vector>

#include "plants.hpp"
#include "reference.hpp"
#include "reservoir.hpp"
#include "training.hpp"
#include "types.hpp"

namespace rcc {

// Ordered stack of trained reservoir layers whose readouts sum into the
// plant input.  Every layer receives the same (y, r_delta) pair.  Layer
// states persist across runs so that a control phase can continue from the
// end of a training phase.
class DeepController {
public:
  explicit DeepController(double delta) : delta_(delta) {}

  double delta() const { return delta_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  std::vector<Esn>& layers() { return layers_; }
  const std::vector<Esn>& layers() const { return layers_; }

  void add_trained_layer(Esn esn) {
    require(esn.trained(), "controller: layer must be trained",
            ErrorCode::Untrained);
    layers_.push_back(std::move(esn));
  }

  void reset_states() {
    for (auto& esn : layers_) esn.reset();
  }

  // total control signal for the current layer states
  Vec control(int input_dim) const {
    Vec v = Vec::Zero(input_dim);
    Vec tmp(input_dim);
    for (const auto& esn : layers_) {
      esn.readout_into(esn.state(), tmp);
      v += tmp;
    }
    return v;
  }

private:
  double delta_;
  std::vector<Esn> layers_;
};

// Full result of one closed-loop phase.  Trajectories are sampled at the
// integration step; `t0` is the absolute experiment time of the first
// sample (the reference is evaluated on the same clock).
struct ControlRunResult {
  double h = 0.0;
  double t0 = 0.0;        // experiment time when this phase started
  double settle = 0.0;    // transient discarded before error windows
  Mat y;                  // m x n
  Mat r;                  // m x n
  Mat v;                  // l x n total control input
  std::vector<Mat> v_layers;  // optional per-layer contributions

  long samples() const { return y.cols(); }
  double duration() const { return h * static_cast<double>(samples() - 1); }

  // time-averaged |y - r| over [t0 + settle + skip, +window]; window <= 0
  // means "to the end of the phase"
  double control_error(double window = 0.0, double skip = 0.0) const;
  // root-mean-square of |y - r| over the same window convention
  double control_rmse(double window = 0.0, double skip = 0.0) const;
};

struct RunOptions {
  double t0 = 0.0;            // experiment-clock offset of this phase
  double settle = 0.0;        // <= 0: use 5 * max layer time constant
  bool record_per_layer = false;
  // extra external input added to the summed readouts (training
  // perturbation during deeper-layer harvests)
  const SampledSignal* extra_input = nullptr;
  // actuator saturation per channel (|v| clamp); <= 0 disables
  double actuator_limit = 0.0;
};

// Co-integrate the plant and all reservoir layers as one coupled system:
// each layer driven by (y(t), r(t + delta)), the plant by the summed
// readouts.  States of plant and layers advance in place.  Throws
// DivergedError if the plant leaves 10x its attractor bound.
ControlRunResult closed_loop_run(Plant& plant, DeepController& controller,
                                 const Reference& reference, double duration,
                                 double h, const RunOptions& opts = {});

struct AddLayerResult {
  TrainDiagnostics diagnostics;
  TrainingRecord record;  // harvest of the partially controlled plant
};

// Train layer n+1 on the closed-loop system formed by the plant and the n
// existing layers: perturb with a fresh band-limited signal added to the
// summed control, harvest (y(t), y(t+delta), v'(t)), then fit the new
// readout offline.  Existing layers run in their control configuration
// against `reference` while the plant is perturbed.  The new layer joins the
// controller warm (its state continues from the training integration).
AddLayerResult add_layer(Plant& plant, DeepController& controller,
                         const EsnHyperparams& esn_params,
                         const TrainSignalParams& signal_params,
                         const ControlTimescales& times,
                         const Reference& reference,
                         const RunOptions& run_opts = {},
                         const TrainOptions& train_opts = {},
                         bool harvest_test_window = false);

}  // namespace rcc
