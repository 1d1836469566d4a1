#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reservoir.hpp"
#include "signal.hpp"
#include "training.hpp"
#include "types.hpp"

namespace rcc {

// One experiment, fully resolved: plant, reservoir and control-specific
// hyperparameters, layer schedule, reference, run windows, seeds.
// Round-trips losslessly through JSON; an INI-style key/value file with
// [sections] is accepted as the human-editable alternative.
struct ExperimentConfig {
  std::string name = "experiment";

  struct PlantCfg {
    std::string kind = "mackey_glass";  // mackey_glass | lorenz | circuit
    double h = 0.0;                     // 0 -> plant default
    double burn_in = 0.0;               // 0 -> per-plant default
    bool circuit_full_inputs = false;
    double initial = 0.5;               // mackey-glass constant history
  } plant;

  EsnHyperparams esn;      // esn.seed is ignored; seeds come from run.seed
  ControlTimescales times;
  TrainSignalParams signal;

  struct LayersCfg {
    int count = 1;
    int n_nodes = 0;       // 0 -> esn.n_nodes for every layer
  } layers;

  struct ReferenceCfg {
    std::string kind = "uss";  // uss | constant | square | ellipse
    std::vector<double> value;     // constant target (observable space)
    double period = 0.0;           // square / ellipse
    double smoothing = 0.0;        // square ramp length
    double duty = 0.5;
    // ellipse: segment selection from an uncontrolled run
    double ellipse_observe = 200.0;
  } reference;

  struct ControlCfg {
    double duration = 0.0;         // per control phase; 0 -> default
    double error_skip = 0.0;       // extra transient skipped before metrics
    double error_window = 0.0;     // 0 -> to the end of the phase
    double actuator_limit = 0.0;   // |v| clamp; 0 -> off
    double train_noise = 0.0;      // measurement-noise hook (training only)
  } control;

  struct FpgaCfg {
    int int_bits = 4;              // state format; 0 -> fit to the weights
    int input_int_bits = 9;
    double lut_x_max = 4.0;
    int adc_bits = 12;
    double adc_fullscale = 1.0;
    int dac_bits = 16;
    double dac_fullscale = 1.0;
  } fpga;

  struct RunCfg {
    uint64_t master_seed = 1;
    int seeds = 1;                 // independent reservoir realizations
    int threads = 0;               // 0 -> hardware concurrency
  } run;

  std::string to_json(int indent = 2) const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_ini(const std::string& text);
  // dispatch on leading '{' after whitespace
  static ExperimentConfig from_file(const std::string& path);

  void validate() const;

  // built-in defaults reproducing the paper-style studies
  static ExperimentConfig preset(const std::string& name);
  static std::vector<std::string> preset_names();
};

}  // namespace rcc
