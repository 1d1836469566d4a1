#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "controller.hpp"
#include "fixedpoint.hpp"
#include "plants.hpp"
#include "reference.hpp"
#include "types.hpp"

namespace rcc {

std::unique_ptr<Plant> make_plant(const ExperimentConfig& config);

// Resolve the configured reference against the (burned-in) plant: "uss"
// locates the positive nonzero steady state, "square" defaults to the
// +/- steady-state observables, "ellipse" observes an uncontrolled segment
// and fits.  Returns auxiliary measurements alongside.
struct ResolvedReference {
  Reference reference;
  double attractor_scale = 0.0;  // sum of per-component std (ellipse runs)
  std::optional<EllipseFit> ellipse;
};
ResolvedReference resolve_reference(const ExperimentConfig& config,
                                    Plant& plant, uint64_t seed);

// Re-synchronize loaded (cold) layers to a live plant through the delay-line
// arrangement: the plant runs uncontrolled for `duration` while each layer
// integrates against (y(t - delta), y(t)).  Leaves reservoir states warm and
// the plant at the end of the sync run.
void warm_sync(Plant& plant, DeepController& controller, double duration);

struct LayerRunSummary {
  int layer = 0;
  int n_nodes = 0;
  double train_nrmse = 0.0;
  double inversion_error = 0.0;        // open-loop test window (when present)
  double inversion_error_var_v = 0.0;  // alternative normalization (var of v)
  double w_out_max_abs = 0.0;
  double control_error = 0.0;  // after this layer's control phase
  double control_rmse = 0.0;
  bool diverged = false;
  double diverged_at = 0.0;
};

struct SingleRunResult {
  uint64_t seed = 0;
  bool completed = false;
  std::string error;
  std::vector<LayerRunSummary> layers;
  double baseline_error = 0.0;  // uncontrolled mean |y - r|, if measured
  double attractor_scale = 0.0;
  double final_control_error = 0.0;
  double final_control_rmse = 0.0;
  double residual_control_norm = 0.0;  // mean |v| on the final error window

  std::string to_json() const;
};

struct RunFlags {
  bool measure_baseline = false;
  bool harvest_test_window = false;  // extend harvests for Eq.-14 evaluation
  bool keep_esns = false;            // retain trained layers in the result
  std::string out_dir;               // write artifacts when non-empty
  int trajectory_decimate = 0;       // 0 -> auto
};

// One seed of the configured experiment: burn-in, sequential layer
// training interleaved with control phases, metrics.
SingleRunResult run_single(const ExperimentConfig& config, uint64_t seed,
                           const RunFlags& flags = {},
                           std::vector<Esn>* esns_out = nullptr);

// Train-only flow: harvest + fit each layer (control phases still run
// between layers for deep schedules), save layer files + training record.
SingleRunResult run_train(const ExperimentConfig& config, uint64_t seed,
                          const std::string& out_dir);

// Control-only flow: load layer files, re-synchronize, run the closed loop.
SingleRunResult run_control(const ExperimentConfig& config, uint64_t seed,
                            const std::vector<std::string>& esn_paths,
                            const std::string& out_dir);

// Median-aggregated experiment over config.run.seeds realizations.
struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<SingleRunResult> runs;
  std::string to_json() const;
};
ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 const std::string& out_dir = "");

// Cartesian sweep over "path=v1,v2,...;path2=..." axes (paths address the
// config JSON, e.g. esn.n or signal.lambda).  One row per (point, seed);
// failures become status rows, never abort the sweep.  Returns the CSV path.
std::string sweep(const ExperimentConfig& base, const std::string& axes_spec,
                  const std::string& out_dir);

// Named reproductions of the paper-style studies; writes CSV/dat artifacts
// and a JSON summary, returns the summary JSON text.
std::string reproduce(const std::string& which, const std::string& out_dir,
                      uint64_t master_seed = 0, int seeds_override = 0);

// Fixed-point emulation of the configured experiment (circuit-style flow):
// layers are trained on ADC-quantized observations and deployed quantized;
// the closed loop runs through the ADC/DAC path.
struct FpgaRunResult {
  SingleRunResult run;
  double lut_max_error = 0.0;
  long saturation_count = 0;
  double max_quantization_error = 0.0;
};
FpgaRunResult run_fpga_experiment(const ExperimentConfig& config,
                                  uint64_t seed,
                                  const std::string& out_dir = "");

double median(std::vector<double> v);

}  // namespace rcc
