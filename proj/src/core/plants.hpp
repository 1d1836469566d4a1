#pragma once

#include <memory>
#include <vector>

#include "types.hpp"

namespace rcc {

// A simulated plant: hidden state x, accessible inputs v, observable y(x).
// The stepper integrates dx/dt = f(x, v); `deriv` must stay pure so that a
// caller can evaluate Runge-Kutta stages, with `stage_offset` (time past the
// last committed sample, in [0, h]) available to delay terms.  `commit`
// finalizes one step of size h.
class Plant {
public:
  virtual ~Plant() = default;

  virtual int state_dim() const = 0;
  virtual int obs_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual double default_step() const = 0;

  virtual const Vec& state() const = 0;
  // Reset hidden state; for delay plants this also fills the history with
  // the given constant state.
  virtual void set_state(const Vec& x) = 0;

  // Complete dynamical state; for delay plants this is the whole history
  // segment (oldest first), otherwise identical to state().
  virtual Vec full_state() const { return state(); }
  virtual void set_full_state(const Vec& x) { set_state(x); }

  virtual void observe(const Vec& x, Vec& y) const = 0;
  virtual void deriv(const Vec& x, double stage_offset, const Vec& v,
                     Vec& dx) const = 0;
  virtual void commit(const Vec& x_next, double h) = 0;

  // Amplitude scale of the uncontrolled attractor; the closed-loop
  // divergence guard trips at 10x this value.
  virtual double attractor_bound() const = 0;

  virtual std::unique_ptr<Plant> clone() const = 0;

  Vec observe() const {
    Vec y(obs_dim());
    observe(state(), y);
    return y;
  }

  // One RK4 step with v held constant; shares the coupled-stepper kernel
  // so that an empty controller reproduces this trajectory bit-for-bit.
  void step(const Vec& v, double h);
  void step_zero(double h) { step(Vec::Zero(input_dim()), h); }
};

// dx/dt = -gamma x + beta x(t-tau) / (1 + x(t-tau)^q) + v,  y = x.
// Delayed stage values come from linear interpolation of the sample history.
class MackeyGlassPlant final : public Plant {
public:
  struct Params {
    double gamma = 0.1;
    double beta = 0.2;
    double q = 10.0;
    double tau = 17.0;
    double h = 0.1;  // tau/h must be an integer
  };

  explicit MackeyGlassPlant(const Params& p = {}, double x0 = 0.5);

  int state_dim() const override { return 1; }
  int obs_dim() const override { return 1; }
  int input_dim() const override { return 1; }
  double default_step() const override { return params_.h; }
  const Vec& state() const override { return state_; }
  void set_state(const Vec& x) override;
  void set_history(const std::vector<double>& history);
  Vec full_state() const override;
  void set_full_state(const Vec& x) override;
  void observe(const Vec& x, Vec& y) const override { y = x; }
  void deriv(const Vec& x, double stage_offset, const Vec& v,
             Vec& dx) const override;
  void commit(const Vec& x_next, double h) override;
  double attractor_bound() const override { return 1.5; }
  std::unique_ptr<Plant> clone() const override {
    return std::make_unique<MackeyGlassPlant>(*this);
  }

  const Params& params() const { return params_; }
  long history_len() const { return static_cast<long>(buf_.size()); }

private:
  double delayed(double stage_offset) const;

  Params params_;
  long delay_steps_;
  std::vector<double> buf_;  // x over [t - tau, t]; buf_.back() == state
  long head_ = 0;            // index of the oldest sample
  Vec state_;
};

// Lorenz '63 with additive inputs on all three components, y = x.
class LorenzPlant final : public Plant {
public:
  struct Params {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double h = 1e-3;
  };

  explicit LorenzPlant(const Params& p = {}, const Vec& x0 = Vec::Zero(3));

  int state_dim() const override { return 3; }
  int obs_dim() const override { return 3; }
  int input_dim() const override { return 3; }
  double default_step() const override { return params_.h; }
  const Vec& state() const override { return state_; }
  void set_state(const Vec& x) override { state_ = x; }
  void observe(const Vec& x, Vec& y) const override { y = x; }
  void deriv(const Vec& x, double stage_offset, const Vec& v,
             Vec& dx) const override;
  void commit(const Vec& x_next, double) override { state_ = x_next; }
  double attractor_bound() const override { return 50.0; }
  std::unique_ptr<Plant> clone() const override {
    return std::make_unique<LorenzPlant>(*this);
  }

  const Params& params() const { return params_; }

private:
  Params params_;
  Vec state_;
};

// Double-scroll circuit in scaled units: volts, milliamps, microseconds
// (so R in kOhm, C in nF, L in mH).  State (V1, V2, I); observable (V1, V2).
// The default single accessible input is the current into the V1 node;
// the full three-input variant is available for testing.
class CircuitPlant final : public Plant {
public:
  struct Params {
    double c1 = 10.0;   // nF
    double c2 = 10.0;   // nF
    double l = 55.0;    // mH
    double r_n = 3.0;   // kOhm, active negative resistance
    double r_m = 0.455; // kOhm
    double r_d = 7.86;  // kOhm
    double i_r = 5.63e-6;  // mA
    double alpha = 11.6;
    double v_d = 0.58;  // V
    double h = 1.0;     // us
    bool full_inputs = false;  // accept (v1, v2, v3) instead of v1 only
  };

  explicit CircuitPlant(const Params& p = {}, const Vec& x0 = Vec::Zero(3));

  int state_dim() const override { return 3; }
  int obs_dim() const override { return 2; }
  int input_dim() const override { return params_.full_inputs ? 3 : 1; }
  double default_step() const override { return params_.h; }
  const Vec& state() const override { return state_; }
  void set_state(const Vec& x) override { state_ = x; }
  void observe(const Vec& x, Vec& y) const override { y = x.head(2); }
  void deriv(const Vec& x, double stage_offset, const Vec& v,
             Vec& dx) const override;
  void commit(const Vec& x_next, double) override { state_ = x_next; }
  double attractor_bound() const override { return 1.2; }
  std::unique_ptr<Plant> clone() const override {
    return std::make_unique<CircuitPlant>(*this);
  }

  const Params& params() const { return params_; }
  double diode_conductance(double v) const;  // g(V)

private:
  Params params_;
  Vec state_;
};

struct SteadyState {
  Vec x;
  double residual = 0.0;
  bool converged = false;
};

// Newton-refine roots of f(x, 0) = 0 from the supplied guesses (numerical
// Jacobian).  Non-convergence is reported per guess, never thrown.
// Nearby duplicates are merged.
std::vector<SteadyState> find_steady_states(const Plant& plant,
                                            const std::vector<Vec>& guesses,
                                            double tol = 1e-12,
                                            int max_iter = 100);

// Conventional guesses: {0, 1} for Mackey-Glass, {origin, +/-C} for Lorenz,
// {origin, +/-(V1ss, V2ss, Iss)} for the circuit.
std::vector<Vec> default_steady_state_guesses(const Plant& plant);

// Largest Lyapunov exponent estimate by two-trajectory divergence with
// periodic renormalization.
double lyapunov_exponent(const Plant& plant, double h, long steps,
                         long renorm_every = 50, double d0 = 1e-8);

}  // namespace rcc
