#include "fixedpoint.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rcc {

QFormat QFormat::fitting(double max_abs) {
  for (int i = 0; i <= 30; ++i) {
    QFormat q{i, 31 - i};
    if (max_abs < q.max_value()) return q;
  }
  throw Error(ErrorCode::FormatOverflow,
              "qformat: no 32-bit format covers the requested range");
}

int32_t fx_from_double(double x, const QFormat& q, bool* saturated) {
  const double scaled = std::ldexp(x, q.frac_bits);
  double r = std::nearbyint(scaled);
  bool sat = false;
  if (r > static_cast<double>(INT32_MAX)) {
    r = static_cast<double>(INT32_MAX);
    sat = true;
  } else if (r < static_cast<double>(INT32_MIN)) {
    r = static_cast<double>(INT32_MIN);
    sat = true;
  }
  if (saturated) *saturated = sat;
  return static_cast<int32_t>(r);
}

int32_t fx_add_sat(int32_t a, int32_t b, long* sat_count) {
  const int64_t s = static_cast<int64_t>(a) + static_cast<int64_t>(b);
  if (s > INT32_MAX) {
    if (sat_count) ++*sat_count;
    return INT32_MAX;
  }
  if (s < INT32_MIN) {
    if (sat_count) ++*sat_count;
    return INT32_MIN;
  }
  return static_cast<int32_t>(s);
}

namespace {

// round-to-nearest (ties away from zero) arithmetic shift
inline int64_t round_shift(int64_t v, int shift) {
  if (shift <= 0) return v << (-shift);
  const int64_t half = int64_t{1} << (shift - 1);
  if (v >= 0) return (v + half) >> shift;
  return -((-v + half) >> shift);
}

inline int64_t round_shift128(__int128 v, int shift) {
  if (shift <= 0) return static_cast<int64_t>(v << (-shift));
  const __int128 half = static_cast<__int128>(1) << (shift - 1);
  __int128 r = v >= 0 ? (v + half) >> shift : -((-v + half) >> shift);
  return static_cast<int64_t>(r);
}

inline int32_t sat32(int64_t v, long* sat_count) {
  if (v > INT32_MAX) {
    if (sat_count) ++*sat_count;
    return INT32_MAX;
  }
  if (v < INT32_MIN) {
    if (sat_count) ++*sat_count;
    return INT32_MIN;
  }
  return static_cast<int32_t>(v);
}

}  // namespace

int32_t fx_mul_shift(int32_t a, int32_t b, int shift, long* sat_count) {
  const int64_t prod = static_cast<int64_t>(a) * static_cast<int64_t>(b);
  return sat32(round_shift(prod, shift), sat_count);
}

TanhLut::TanhLut(double x_max, const QFormat& value_fmt)
    : x_max_(x_max), fmt_(value_fmt) {
  require(x_max > 0, "tanh lut: x_max must be positive");
  const double step = x_max / 512.0;
  for (int i = 0; i < 1024; ++i) {
    const double x = (static_cast<double>(i) - 512.0) * step;
    table_[static_cast<size_t>(i)] = fx_from_double(std::tanh(x), fmt_);
  }
}

int32_t TanhLut::lookup(int32_t x, const QFormat& arg_fmt) const {
  const double step = x_max_ / 512.0;
  // index = 512 + round(x / step) in the argument's scale, computed exactly
  // in integers: idx_offset = round(x * 512 / (x_max * 2^F))
  const double xd = fx_to_double(x, arg_fmt);
  long idx = 512 + static_cast<long>(std::nearbyint(xd / step));
  if (idx < 0) idx = 0;
  if (idx > 1023) idx = 1023;
  return table_[static_cast<size_t>(idx)];
}

double TanhLut::max_abs_error(int samples) const {
  const QFormat arg = fmt_;
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x =
        -1.2 * x_max_ + 2.4 * x_max_ * static_cast<double>(i) / (samples - 1);
    const int32_t xf = fx_from_double(x, arg);
    const double approx = fx_to_double(lookup(xf, arg), fmt_);
    const double exact = std::tanh(fx_to_double(xf, arg));
    worst = std::max(worst, std::abs(approx - exact));
  }
  return worst;
}

void TanhLut::dump_hex(const std::string& path) const {
  std::ofstream out(path);
  require(out.good(), "lut: cannot open " + path + " for writing",
          ErrorCode::Io);
  out << "# 10-bit tanh lookup table, x_max=" << x_max_ << ", Q"
      << fmt_.int_bits << "." << fmt_.frac_bits << "\n";
  for (size_t i = 0; i < table_.size(); ++i) {
    out << std::setw(4) << i << " 0x" << std::hex << std::setw(8)
        << std::setfill('0')
        << static_cast<uint32_t>(table_[i]) << std::dec << std::setfill(' ')
        << "\n";
  }
}

namespace {

int32_t quantize_param(double x, const QFormat& q, const std::string& name,
                       long row, long col, QuantizationReport* report) {
  if (!(std::abs(x) < q.max_value())) {
    std::ostringstream msg;
    msg << "quantize: " << name << "(" << row << ", " << col << ") = " << x
        << " exceeds Q" << q.int_bits << "." << q.frac_bits << " range +/-"
        << q.max_value();
    throw Error(ErrorCode::FormatOverflow, msg.str());
  }
  const int32_t fx = fx_from_double(x, q);
  if (report) {
    report->max_weight_error =
        std::max(report->max_weight_error,
                 std::abs(x - std::ldexp(static_cast<double>(fx), -q.frac_bits)));
    report->max_abs_param = std::max(report->max_abs_param, std::abs(x));
  }
  return fx;
}

}  // namespace

FixedEsn FixedEsn::quantize(const Esn& esn, const FixedEsnConfig& cfg,
                            QuantizationReport* report) {
  cfg.state_fmt.validate();
  cfg.input_fmt.validate();
  require(esn.trained(), "quantize: readout must be trained before loading",
          ErrorCode::Untrained);
  require(cfg.dt > 0 && cfg.dt <= esn.time_constant(),
          "quantize: need 0 < dt <= c");

  const int n = esn.n_nodes();
  const int m = esn.obs_dim();
  const int l = esn.input_dim();
  FixedEsn fx(cfg, n, m, l);

  const QFormat& qs = cfg.state_fmt;
  fx.w_rowptr_.assign(static_cast<size_t>(n) + 1, 0);
  const SpMat& w = esn.w();
  for (int i = 0; i < w.outerSize(); ++i) {
    fx.w_rowptr_[static_cast<size_t>(i)] = static_cast<int>(fx.w_col_.size());
    for (SpMat::InnerIterator it(w, i); it; ++it) {
      fx.w_col_.push_back(static_cast<int>(it.col()));
      fx.w_val_.push_back(
          quantize_param(it.value(), qs, "w", it.row(), it.col(), report));
    }
  }
  fx.w_rowptr_[static_cast<size_t>(n)] = static_cast<int>(fx.w_col_.size());

  fx.w_in_y_.resize(static_cast<size_t>(n) * m);
  fx.w_in_r_.resize(static_cast<size_t>(n) * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      fx.w_in_y_[static_cast<size_t>(i) * m + j] =
          quantize_param(esn.w_in_y()(i, j), qs, "w_in_y", i, j, report);
      fx.w_in_r_[static_cast<size_t>(i) * m + j] =
          quantize_param(esn.w_in_r()(i, j), qs, "w_in_r", i, j, report);
    }
  fx.bias_.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    fx.bias_[static_cast<size_t>(i)] =
        quantize_param(esn.bias()(i), qs, "b", i, 0, report);
  fx.w_out_.resize(static_cast<size_t>(l) * n);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < n; ++j)
      fx.w_out_[static_cast<size_t>(i) * n + j] =
          quantize_param(esn.w_out()(i, j), qs, "w_out", i, j, report);
  fx.ratio_ = quantize_param(cfg.dt / esn.time_constant(), qs, "dt/c", 0, 0,
                             report);
  fx.act_.assign(static_cast<size_t>(n), 0);
  return fx;
}

void FixedEsn::step(const std::vector<int32_t>& y,
                    const std::vector<int32_t>& r_delta) {
  const int n = n_nodes();
  const int m = obs_dim_;
  const int fs = cfg_.state_fmt.frac_bits;
  const int fi = cfg_.input_fmt.frac_bits;
  require(fs >= fi, "fixed esn: input format must not be finer than state");
  require(static_cast<int>(y.size()) == m &&
              static_cast<int>(r_delta.size()) == m,
          "fixed esn: input dimension mismatch");

  // pre-activation: full-precision accumulate at scale 2^-2Fs, one rounding
  for (int i = 0; i < n; ++i) {
    __int128 acc = 0;
    for (int kk = w_rowptr_[static_cast<size_t>(i)];
         kk < w_rowptr_[static_cast<size_t>(i) + 1]; ++kk)
      acc += static_cast<int64_t>(w_val_[static_cast<size_t>(kk)]) *
             static_cast<int64_t>(state_[static_cast<size_t>(
                 w_col_[static_cast<size_t>(kk)])]);
    __int128 acc_in = 0;
    for (int j = 0; j < m; ++j) {
      acc_in += static_cast<int64_t>(w_in_y_[static_cast<size_t>(i) * m + j]) *
                static_cast<int64_t>(y[static_cast<size_t>(j)]);
      acc_in += static_cast<int64_t>(w_in_r_[static_cast<size_t>(i) * m + j]) *
                static_cast<int64_t>(r_delta[static_cast<size_t>(j)]);
    }
    // align input-product scale 2^-(Fs+Fi) up to 2^-2Fs, add bias at 2^-2Fs
    acc += acc_in << (fs - fi);
    acc += static_cast<__int128>(bias_[static_cast<size_t>(i)]) << fs;
    const int32_t arg = sat32(round_shift128(acc, fs), &sat_count_);
    act_[static_cast<size_t>(i)] = lut_.lookup(arg, cfg_.state_fmt);
  }
  // u += (dt/c) (tanh(...) - u), saturating
  for (int i = 0; i < n; ++i) {
    const int64_t diff = static_cast<int64_t>(act_[static_cast<size_t>(i)]) -
                         static_cast<int64_t>(state_[static_cast<size_t>(i)]);
    const int64_t upd = round_shift(static_cast<int64_t>(ratio_) * diff, fs);
    state_[static_cast<size_t>(i)] = sat32(
        static_cast<int64_t>(state_[static_cast<size_t>(i)]) + upd,
        &sat_count_);
  }
}

void FixedEsn::readout(std::vector<int32_t>& v) const {
  const int n = n_nodes();
  const int l = input_dim_;
  const int fs = cfg_.state_fmt.frac_bits;
  v.resize(static_cast<size_t>(l));
  for (int i = 0; i < l; ++i) {
    __int128 acc = 0;
    for (int j = 0; j < n; ++j)
      acc += static_cast<int64_t>(w_out_[static_cast<size_t>(i) * n + j]) *
             static_cast<int64_t>(state_[static_cast<size_t>(j)]);
    v[static_cast<size_t>(i)] = sat32(round_shift128(acc, fs), &sat_count_);
  }
}

namespace {

double quantize_grid(double x, int bits, double fullscale, bool enabled) {
  if (!enabled) return x;
  const double levels = static_cast<double>((1 << (bits - 1)) - 1);
  double code = std::nearbyint(x / fullscale * levels);
  if (code > levels) code = levels;
  if (code < -levels - 1) code = -levels - 1;
  return code * fullscale / levels;
}

}  // namespace

EmulateResult emulate_control_run(Plant& plant,
                                  std::vector<FixedEsn>& controllers,
                                  const Reference& reference, double duration,
                                  const AdcDacConfig& adc_dac,
                                  const EmulateOptions& opts) {
  require(!controllers.empty(), "emulate: need at least one layer");
  const FixedEsnConfig& cfg = controllers.front().config();
  const double dt = cfg.dt;
  const int sub = opts.plant_steps_per_update;
  require(sub >= 1, "emulate: plant_steps_per_update must be >= 1");
  const double h_plant = dt / static_cast<double>(sub);
  const int m = plant.obs_dim();
  const int l = plant.input_dim();
  for (const auto& c : controllers)
    require(c.obs_dim() == m && c.input_dim() == l,
            "emulate: controller dimensions do not match the plant");

  const long n_updates = static_cast<long>(std::llround(duration / dt));
  EmulateResult out;
  out.run.h = dt;
  out.run.t0 = opts.t0;
  out.run.settle = opts.settle;
  out.run.y.resize(m, n_updates + 1);
  out.run.r.resize(m, n_updates + 1);
  out.run.v.resize(l, n_updates + 1);

  std::vector<int32_t> y_fx(static_cast<size_t>(m));
  std::vector<int32_t> r_fx(static_cast<size_t>(m));
  std::vector<int32_t> v_fx, v_acc(static_cast<size_t>(l));
  Vec y(m), rr(m), rdel(m), v_cmd(l);
  long sat_total = 0;

  for (long k = 0; k <= n_updates; ++k) {
    const double t_abs = opts.t0 + static_cast<double>(k) * dt;
    plant.observe(plant.state(), y);
    reference.eval(t_abs, rr);
    out.run.y.col(k) = y;
    out.run.r.col(k) = rr;

    // ADC path, then fixed-point input conversion
    for (int j = 0; j < m; ++j) {
      const double yq = quantize_grid(y(j), adc_dac.adc_bits,
                                      adc_dac.adc_fullscale,
                                      adc_dac.quantize_adc);
      y_fx[static_cast<size_t>(j)] = fx_from_double(yq, cfg.input_fmt);
    }
    reference.eval(t_abs + opts.delta, rdel);
    for (int j = 0; j < m; ++j)
      r_fx[static_cast<size_t>(j)] = fx_from_double(rdel(j), cfg.input_fmt);

    std::fill(v_acc.begin(), v_acc.end(), 0);
    for (auto& ctl : controllers) {
      ctl.step(y_fx, r_fx);
      ctl.readout(v_fx);
      for (int j = 0; j < l; ++j)
        v_acc[static_cast<size_t>(j)] =
            fx_add_sat(v_acc[static_cast<size_t>(j)],
                       v_fx[static_cast<size_t>(j)], &sat_total);
    }

    for (int j = 0; j < l; ++j) {
      double vd = fx_to_double(v_acc[static_cast<size_t>(j)], cfg.state_fmt);
      if (opts.extra_input) vd += opts.extra_input->at(k)(j);
      v_cmd(j) = quantize_grid(vd, adc_dac.dac_bits, adc_dac.dac_fullscale,
                               adc_dac.quantize_dac);
    }
    out.run.v.col(k) = v_cmd;
    if (k == n_updates) break;
    for (int s = 0; s < sub; ++s) plant.step(v_cmd, h_plant);
  }
  for (const auto& ctl : controllers) sat_total += ctl.saturation_count();
  out.saturation_count = sat_total;
  return out;
}

}  // namespace rcc
