#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "controller.hpp"
#include "plants.hpp"
#include "reference.hpp"
#include "reservoir.hpp"
#include "types.hpp"

namespace rcc {

// Two's-complement 32-bit fixed point: 1 sign bit, `int_bits` integer bits,
// `frac_bits` fractional bits.
struct QFormat {
  int int_bits = 4;
  int frac_bits = 27;

  void validate() const {
    require(int_bits >= 0 && frac_bits >= 1 && int_bits + frac_bits == 31,
            "qformat: need sign + I + F = 32");
  }
  double resolution() const { return std::ldexp(1.0, -frac_bits); }
  double max_value() const {
    return static_cast<double>(INT32_MAX) * resolution();
  }
  // smallest format whose range covers max_abs
  static QFormat fitting(double max_abs);
};

// round-to-nearest conversion with saturation
int32_t fx_from_double(double x, const QFormat& q, bool* saturated = nullptr);
inline double fx_to_double(int32_t v, const QFormat& q) {
  return std::ldexp(static_cast<double>(v), -q.frac_bits);
}
int32_t fx_add_sat(int32_t a, int32_t b, long* sat_count = nullptr);
// (a * b) rescaled by 2^-shift with round-to-nearest, saturating
int32_t fx_mul_shift(int32_t a, int32_t b, int shift,
                     long* sat_count = nullptr);

// 1024-entry tanh lookup table over [-x_max, x_max); entry i sits at
// (i - 512) * x_max / 512, so the zero entry is exact and entries are
// odd-symmetric about index 512.  Out-of-range arguments clamp to the end
// entries (~tanh(x_max)).  Values are stored in the given Q format.
class TanhLut {
public:
  TanhLut(double x_max, const QFormat& value_fmt);

  int32_t lookup(int32_t x, const QFormat& arg_fmt) const;
  double x_max() const { return x_max_; }
  const std::array<int32_t, 1024>& table() const { return table_; }
  const QFormat& value_format() const { return fmt_; }
  // worst-case |lut(x) - tanh(x)| over a dense argument sweep
  double max_abs_error(int samples = 200000) const;
  void dump_hex(const std::string& path) const;

private:
  double x_max_;
  QFormat fmt_;
  std::array<int32_t, 1024> table_{};
};

struct FixedEsnConfig {
  QFormat state_fmt{4, 27};   // weights, reservoir state, readout
  QFormat input_fmt{9, 22};   // observables and reference after conversion
  double lut_x_max = 4.0;
  double dt = 1.0;            // controller update interval (plant time units)
};

struct QuantizationReport {
  double max_weight_error = 0.0;  // worst |w - q(w)| over all parameters
  double max_abs_param = 0.0;
};

// Bit-accurate software model of one reservoir layer on the FPGA:
// quantized fixed parameters, Euler integration of the reservoir ODE with a
// LUT tanh, full-precision multiply-accumulate with a single rounding.
class FixedEsn {
public:
  // Quantize a trained reservoir.  Parameters outside the state format's
  // range raise FormatOverflow naming the offending weight.
  static FixedEsn quantize(const Esn& esn, const FixedEsnConfig& cfg,
                           QuantizationReport* report = nullptr);

  // one 't += dt' update; inputs already in the input format
  void step(const std::vector<int32_t>& y, const std::vector<int32_t>& r_delta);
  // v = W_out u, accumulated in full precision then rounded once
  void readout(std::vector<int32_t>& v) const;

  void reset() { state_.assign(state_.size(), 0); }
  int n_nodes() const { return static_cast<int>(state_.size()); }
  int obs_dim() const { return obs_dim_; }
  int input_dim() const { return input_dim_; }
  const FixedEsnConfig& config() const { return cfg_; }
  const TanhLut& lut() const { return lut_; }
  long saturation_count() const { return sat_count_; }
  const std::vector<int32_t>& state() const { return state_; }
  std::vector<int32_t>& state() { return state_; }

private:
  FixedEsn(const FixedEsnConfig& cfg, int n, int m, int l)
      : cfg_(cfg), lut_(cfg.lut_x_max, cfg.state_fmt), obs_dim_(m),
        input_dim_(l), state_(static_cast<size_t>(n), 0) {}

  FixedEsnConfig cfg_;
  TanhLut lut_;
  int obs_dim_, input_dim_;
  // reservoir matrix in CSR form
  std::vector<int> w_rowptr_;
  std::vector<int> w_col_;
  std::vector<int32_t> w_val_;
  std::vector<int32_t> w_in_y_, w_in_r_;  // dense row-major n x m
  std::vector<int32_t> bias_;
  std::vector<int32_t> w_out_;            // dense row-major l x n
  int32_t ratio_ = 0;                     // dt / c in state format
  std::vector<int32_t> state_;
  mutable long sat_count_ = 0;
  std::vector<int32_t> act_;              // scratch: activations per step
};

struct AdcDacConfig {
  int adc_bits = 12;
  double adc_fullscale = 1.0;
  int dac_bits = 16;
  double dac_fullscale = 1.0;
  bool quantize_adc = true;
  bool quantize_dac = true;
};

struct EmulateOptions {
  double t0 = 0.0;
  double delta = 0.0;             // reference look-ahead
  int plant_steps_per_update = 1; // ZOH: controller cadence = k plant steps
  const SampledSignal* extra_input = nullptr;  // added before the DAC
  double settle = 0.0;
};

struct EmulateResult {
  ControlRunResult run;
  Mat y_adc;  // the observable stream as the controller saw it (post-ADC)
  long saturation_count = 0;
};

// Closed loop with the fixed-point controller path: the controller sees the
// observable through the ADC, layer readouts are summed in fixed point, and
// the control signal reaches the plant through the DAC, held constant
// between controller updates.
EmulateResult emulate_control_run(Plant& plant,
                                  std::vector<FixedEsn>& controllers,
                                  const Reference& reference, double duration,
                                  const AdcDacConfig& adc_dac,
                                  const EmulateOptions& opts);

}  // namespace rcc
