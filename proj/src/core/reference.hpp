#pragma once

#include <memory>
#include <vector>

#include "types.hpp"

namespace rcc {

// Target trajectory r(t).  Value type; evaluation is pure.
class Reference {
public:
  Reference() = default;

  static Reference constant(const Vec& value);
  // Alternates between a and b with the given period and duty cycle; each
  // transition is an optional linear ramp of length `smoothing`.
  static Reference square_wave(const Vec& a, const Vec& b, double period,
                               double smoothing = 0.0, double duty = 0.5);
  // r(t) = center + ax cos(theta) e1 + bx sin(theta) e2,
  // theta = phase + direction * 2 pi t / period.
  static Reference ellipse(const Vec& center, const Vec& e1, const Vec& e2,
                           double ax, double bx, double period, double phase,
                           int direction);
  // Sampled trajectory replayed with linear interpolation (clamped ends).
  static Reference recorded(double h, Mat values);

  bool valid() const { return dim_ > 0; }
  int dim() const { return dim_; }
  void eval(double t, Vec& out) const;
  Vec operator()(double t) const {
    Vec out(dim_);
    eval(t, out);
    return out;
  }

  enum class Kind { Constant, SquareWave, Ellipse, Recorded };
  Kind kind() const { return kind_; }
  double period() const { return period_; }

private:
  Kind kind_ = Kind::Constant;
  int dim_ = 0;
  // constant / square wave
  Vec a_, b_;
  double period_ = 0.0, smoothing_ = 0.0, duty_ = 0.5;
  // ellipse
  Vec center_, e1_, e2_;
  double ax_ = 0.0, bx_ = 0.0, phase_ = 0.0;
  int direction_ = 1;
  // recorded
  double h_ = 0.0;
  Mat samples_;
};

struct EllipseFit {
  Vec center;        // 3d center
  Vec e1, e2;        // in-plane unit axes (semi-major, semi-minor directions)
  double ax = 0.0;   // semi-major length
  double bx = 0.0;   // semi-minor length
  double period = 0.0;
  double phase = 0.0;
  int direction = 1;
  double rms_residual = 0.0;  // conic fit residual in plane coordinates

  Reference reference() const {
    return Reference::ellipse(center, e1, e2, ax, bx, period, phase,
                              direction);
  }
};

// Fit a time-parameterized ellipse to a trajectory segment sampled at step h:
// principal-component plane through the centroid, direct least-squares conic
// fit constrained to an ellipse, angular frequency from the mean orbital
// period of the segment.  Throws DegenerateFit for collinear segments.
EllipseFit fit_ellipse(const Mat& segment, double h);

}  // namespace rcc
