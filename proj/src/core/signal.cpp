#include "signal.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <vector>

namespace rcc {

namespace {

std::mutex fftw_mutex;  // FFTW planning is not thread-safe

// in-place forward r2c / zero bins / inverse c2r, normalized
void lowpass(std::vector<double>& x, double h, double lambda) {
  const long n = static_cast<long>(x.size());
  const long nbins = n / 2 + 1;
  std::vector<std::complex<double>> spec(nbins);

  std::lock_guard<std::mutex> lock(fftw_mutex);
  fftw_plan fwd = fftw_plan_dft_r2c_1d(
      static_cast<int>(n), x.data(),
      reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
  fftw_execute(fwd);
  fftw_destroy_plan(fwd);

  const double fcut = 1.0 / lambda;
  for (long j = 0; j < nbins; ++j) {
    const double freq = static_cast<double>(j) / (static_cast<double>(n) * h);
    if (freq > fcut * (1.0 + 1e-12)) spec[j] = 0.0;
  }

  fftw_plan inv = fftw_plan_dft_c2r_1d(
      static_cast<int>(n), reinterpret_cast<fftw_complex*>(spec.data()),
      x.data(), FFTW_ESTIMATE);
  fftw_execute(inv);
  fftw_destroy_plan(inv);
  for (auto& v : x) v /= static_cast<double>(n);
}

}  // namespace

void SampledSignal::eval(double t, Vec& out) const {
  const double s = t / h;
  long i = static_cast<long>(std::floor(s));
  if (i < 0) i = 0;
  if (i >= samples() - 1) {
    out = values.col(samples() - 1);
    return;
  }
  const double w = s - static_cast<double>(i);
  out = (1.0 - w) * values.col(i) + w * values.col(i + 1);
}

SampledSignal gen_train_signal(const TrainSignalParams& params, int channels,
                               long n_samples, double h, Rng& rng) {
  params.validate();
  require(channels >= 1, "train signal: need at least one channel");
  require(n_samples >= 2 && h > 0, "train signal: need duration/h >= 2");
  const double duration = static_cast<double>(n_samples) * h;
  // the lowest non-DC bin sits at frequency 1/(n h); it must survive the cut
  require(params.lambda <= duration * (1.0 + 1e-12),
          "train signal: lambda exceeds signal duration (no surviving bins)",
          ErrorCode::Config);

  SampledSignal sig;
  sig.h = h;
  sig.values.resize(channels, n_samples);
  std::vector<double> x(static_cast<size_t>(n_samples));
  for (int ch = 0; ch < channels; ++ch) {
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    lowpass(x, h, params.lambda);
    double lo = x[0], hi = x[0];
    for (double v : x) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double p = params.amplitude;
    if (p == 0.0 || hi == lo) {
      sig.values.row(ch).setZero();
    } else {
      const double scale = 2.0 * p / (hi - lo);
      for (long i = 0; i < n_samples; ++i)
        sig.values(ch, i) = -p + scale * (x[static_cast<size_t>(i)] - lo);
    }
  }
  return sig;
}

double power_above_cutoff(const Vec& samples, double h, double lambda) {
  const long n = samples.size();
  std::vector<double> x(samples.data(), samples.data() + n);
  const long nbins = n / 2 + 1;
  std::vector<std::complex<double>> spec(nbins);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(
        static_cast<int>(n), x.data(),
        reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);
  }
  const double fcut = 1.0 / lambda;
  double total = 0.0, above = 0.0;
  for (long j = 1; j < nbins; ++j) {  // exclude DC from the power budget
    const double freq = static_cast<double>(j) / (static_cast<double>(n) * h);
    const double p = std::norm(spec[j]);
    total += p;
    if (freq > fcut * (1.0 + 1e-12)) above += p;
  }
  return total > 0.0 ? above / total : 0.0;
}

}  // namespace rcc
