#pragma once

#include <cstdint>

#include "rng.hpp"
#include "types.hpp"

namespace rcc {

// Band-limited random perturbation signal parameters: white noise low-passed
// at frequency 1/lambda and rescaled to exactly [-p, p] per channel.
struct TrainSignalParams {
  double lambda = 1.0;     // cutoff period; frequencies above 1/lambda dropped
  double amplitude = 0.1;  // p
  uint64_t seed = 0;

  void validate() const {
    require(lambda > 0, "train signal: lambda must be positive");
    require(amplitude >= 0, "train signal: amplitude must be non-negative");
  }
};

// Multichannel signal sampled at a fixed step; column i holds v(t_i).
struct SampledSignal {
  double h = 0.0;
  Mat values;  // channels x samples

  int channels() const { return static_cast<int>(values.rows()); }
  long samples() const { return values.cols(); }
  double duration() const { return h * static_cast<double>(samples() - 1); }

  Vec at(long i) const { return values.col(i); }
  // linear interpolation between samples; callers pass stage times
  void eval(double t, Vec& out) const;
};

// Draw uniform white samples per channel, drop Fourier bins above 1/lambda,
// inverse transform, rescale affinely so min == -p and max == +p.
// n_samples covers [0, (n_samples-1) h].  Raises Config when lambda is so
// long that no non-DC bin survives.
SampledSignal gen_train_signal(const TrainSignalParams& params, int channels,
                               long n_samples, double h, Rng& rng);

// Fraction of total spectral power above frequency 1/lambda (diagnostic;
// the generator's contract keeps this at numerical zero).
double power_above_cutoff(const Vec& samples, double h, double lambda);

}  // namespace rcc
