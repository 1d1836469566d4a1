#include "plants.hpp"

#include <cmath>

#include "integrate.hpp"

namespace rcc {

void Plant::step(const Vec& v, double h) {
  require(v.size() == input_dim(), "plant: input dimension mismatch");
  require(h > 0, "plant: step size must be positive");
  static thread_local CoupledWorkspace ws;
  static thread_local std::vector<Esn> no_layers;
  const Vec vext3[3] = {v, v, v};
  coupled_rk4_step(*this, no_layers, vext3, nullptr, h, /*t_now=*/0.0, ws,
                   10.0 * attractor_bound());
}

// ---------------------------------------------------------------- Mackey-Glass

MackeyGlassPlant::MackeyGlassPlant(const Params& p, double x0) : params_(p) {
  require(p.h > 0 && p.tau > 0, "mackey-glass: tau and h must be positive");
  const double ratio = p.tau / p.h;
  delay_steps_ = static_cast<long>(std::llround(ratio));
  require(std::abs(ratio - static_cast<double>(delay_steps_)) < 1e-9 &&
              delay_steps_ >= 1,
          "mackey-glass: tau/h must be a positive integer");
  state_ = Vec::Constant(1, x0);
  set_state(state_);
}

void MackeyGlassPlant::set_state(const Vec& x) {
  require(x.size() == 1, "mackey-glass: state is scalar");
  state_ = x;
  buf_.assign(static_cast<size_t>(delay_steps_ + 1), x(0));
  head_ = 0;
}

void MackeyGlassPlant::set_history(const std::vector<double>& history) {
  require(static_cast<long>(history.size()) == delay_steps_ + 1,
          "mackey-glass: history must hold tau/h + 1 samples");
  buf_ = history;
  head_ = 0;
  state_ = Vec::Constant(1, buf_.back());
}

Vec MackeyGlassPlant::full_state() const {
  Vec out(delay_steps_ + 1);
  const long n = static_cast<long>(buf_.size());
  for (long k = 0; k <= delay_steps_; ++k)
    out(k) = buf_[static_cast<size_t>((head_ + k) % n)];
  return out;
}

void MackeyGlassPlant::set_full_state(const Vec& x) {
  require(x.size() == delay_steps_ + 1,
          "mackey-glass: full state must hold tau/h + 1 samples");
  for (long k = 0; k <= delay_steps_; ++k) buf_[static_cast<size_t>(k)] = x(k);
  head_ = 0;
  state_ = Vec::Constant(1, buf_.back());
}

double MackeyGlassPlant::delayed(double stage_offset) const {
  // x(t - tau + stage_offset), linear interpolation between buffered samples
  const double s = stage_offset / params_.h;
  const long i = static_cast<long>(std::floor(s));
  const size_t n = buf_.size();
  const auto at = [&](long k) {
    return buf_[static_cast<size_t>((head_ + k) % static_cast<long>(n))];
  };
  if (i >= delay_steps_) return at(delay_steps_);
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * at(i) + w * at(i + 1);
}

void MackeyGlassPlant::deriv(const Vec& x, double stage_offset, const Vec& v,
                             Vec& dx) const {
  const double xd = delayed(stage_offset);
  dx.resize(1);
  dx(0) = -params_.gamma * x(0) +
          params_.beta * xd / (1.0 + std::pow(xd, params_.q)) + v(0);
}

void MackeyGlassPlant::commit(const Vec& x_next, double h) {
  require(std::abs(h - params_.h) < 1e-12 * std::max(1.0, params_.h),
          "mackey-glass: step size must equal the history grid step");
  buf_[static_cast<size_t>(head_)] = x_next(0);
  head_ = (head_ + 1) % static_cast<long>(buf_.size());
  state_ = x_next;
}

// --------------------------------------------------------------------- Lorenz

LorenzPlant::LorenzPlant(const Params& p, const Vec& x0)
    : params_(p), state_(x0) {
  require(x0.size() == 3, "lorenz: state is 3-dimensional");
}

void LorenzPlant::deriv(const Vec& x, double, const Vec& v, Vec& dx) const {
  dx.resize(3);
  dx(0) = params_.sigma * (x(1) - x(0)) + v(0);
  dx(1) = x(0) * (params_.rho - x(2)) - x(1) + v(1);
  dx(2) = x(0) * x(1) - params_.beta * x(2) + v(2);
}

// -------------------------------------------------------------------- Circuit

CircuitPlant::CircuitPlant(const Params& p, const Vec& x0)
    : params_(p), state_(x0) {
  require(x0.size() == 3, "circuit: state is 3-dimensional");
}

double CircuitPlant::diode_conductance(double v) const {
  return v / params_.r_d +
         2.0 * params_.i_r * std::sinh(params_.alpha * v / params_.v_d);
}

void CircuitPlant::deriv(const Vec& x, double, const Vec& v, Vec& dx) const {
  const double v1 = x(0), v2 = x(1), cur = x(2);
  const double g = diode_conductance(v1 - v2);
  double in1 = v(0), in2 = 0.0, in3 = 0.0;
  if (params_.full_inputs) {
    in2 = v(1);
    in3 = v(2);
  }
  dx.resize(3);
  dx(0) = (v1 / params_.r_n - g + in1) / params_.c1;
  dx(1) = (g - cur + in2) / params_.c2;
  dx(2) = (v2 - params_.r_m * cur + in3) / params_.l;
}

// -------------------------------------------------------------- steady states

std::vector<SteadyState> find_steady_states(const Plant& plant,
                                            const std::vector<Vec>& guesses,
                                            double tol, int max_iter) {
  const int d = plant.state_dim();
  const Vec v0 = Vec::Zero(plant.input_dim());
  Vec f(d), fp(d), fm(d);

  auto field = [&](const Vec& x, Vec& out) { plant.deriv(x, 0.0, v0, out); };

  std::vector<SteadyState> out;
  for (const Vec& guess : guesses) {
    SteadyState ss;
    ss.x = guess;
    Mat jac(d, d);
    for (int it = 0; it < max_iter; ++it) {
      field(ss.x, f);
      ss.residual = f.norm();
      if (!std::isfinite(ss.residual)) break;
      if (ss.residual < tol) {
        ss.converged = true;
        break;
      }
      for (int j = 0; j < d; ++j) {
        const double eps = 1e-7 * std::max(1.0, std::abs(ss.x(j)));
        Vec xp = ss.x, xm = ss.x;
        xp(j) += eps;
        xm(j) -= eps;
        field(xp, fp);
        field(xm, fm);
        jac.col(j) = (fp - fm) / (2.0 * eps);
      }
      Eigen::FullPivLU<Mat> lu(jac);
      if (!lu.isInvertible()) break;
      ss.x -= lu.solve(f);
    }
    if (ss.converged) {
      field(ss.x, f);
      ss.residual = f.norm();
    }
    bool duplicate = false;
    for (const auto& prev : out)
      if (prev.converged && ss.converged &&
          (prev.x - ss.x).norm() < 1e-6 * (1.0 + prev.x.norm()))
        duplicate = true;
    if (!duplicate) out.push_back(std::move(ss));
  }
  return out;
}

std::vector<Vec> default_steady_state_guesses(const Plant& plant) {
  std::vector<Vec> guesses;
  if (dynamic_cast<const MackeyGlassPlant*>(&plant)) {
    guesses.push_back(Vec::Constant(1, 0.0));
    guesses.push_back(Vec::Constant(1, 1.0));
  } else if (const auto* lz = dynamic_cast<const LorenzPlant*>(&plant)) {
    const double c = std::sqrt(lz->params().beta * (lz->params().rho - 1.0));
    guesses.push_back(Vec::Zero(3));
    Vec cp(3), cm(3);
    cp << c, c, lz->params().rho - 1.0;
    cm << -c, -c, lz->params().rho - 1.0;
    guesses.push_back(cp);
    guesses.push_back(cm);
  } else if (dynamic_cast<const CircuitPlant*>(&plant)) {
    guesses.push_back(Vec::Zero(3));
    Vec up(3), um(3);
    up << 0.59, 0.09, 0.20;
    um = -up;
    guesses.push_back(up);
    guesses.push_back(um);
  } else {
    guesses.push_back(Vec::Zero(plant.state_dim()));
  }
  return guesses;
}

double lyapunov_exponent(const Plant& plant, double h, long steps,
                         long renorm_every, double d0) {
  auto a = plant.clone();
  auto b = plant.clone();
  Vec xb = a->full_state();
  xb(xb.size() - 1) += d0;
  b->set_full_state(xb);
  const Vec v0a = Vec::Zero(a->input_dim());

  double log_sum = 0.0;
  long windows = 0;
  for (long i = 0; i < steps; i += renorm_every) {
    for (long k = 0; k < renorm_every; ++k) {
      a->step(v0a, h);
      b->step(v0a, h);
    }
    const Vec fa = a->full_state();
    const Vec fb = b->full_state();
    const double d = (fa - fb).norm();
    if (d <= 0.0 || !std::isfinite(d)) break;
    log_sum += std::log(d / d0);
    ++windows;
    b->set_full_state(fa + (fb - fa) * (d0 / d));
  }
  if (windows == 0) return 0.0;
  return log_sum / (static_cast<double>(windows * renorm_every) * h);
}

}  // namespace rcc
