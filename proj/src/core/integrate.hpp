#pragma once

#include <sstream>
#include <vector>

#include "plants.hpp"
#include "reservoir.hpp"
#include "types.hpp"

namespace rcc {

// Workspace for co-integrating a plant with reservoir layers as one coupled
// RK4 system.  Buffers are grown on first use and reused across steps.
struct CoupledWorkspace {
  Vec kx1, kx2, kx3, kx4, xs;
  std::vector<Vec> ku1, ku2, ku3, ku4, us, u0;
  Vec y, v, du;

  void ensure(int plant_dim, const std::vector<Esn>& layers, int input_dim) {
    if (kx1.size() != plant_dim) {
      kx1.resize(plant_dim); kx2.resize(plant_dim); kx3.resize(plant_dim);
      kx4.resize(plant_dim); xs.resize(plant_dim);
    }
    if (us.size() != layers.size()) {
      const size_t n = layers.size();
      ku1.resize(n); ku2.resize(n); ku3.resize(n); ku4.resize(n);
      us.resize(n); u0.resize(n);
    }
    for (size_t i = 0; i < layers.size(); ++i) {
      const int n = layers[i].n_nodes();
      if (us[i].size() != n) {
        ku1[i].resize(n); ku2[i].resize(n); ku3[i].resize(n);
        ku4[i].resize(n); us[i].resize(n); u0[i].resize(n);
      }
    }
    if (v.size() != input_dim) v.resize(input_dim);
  }
};

// One RK4 step of the coupled (plant, layers) system.
//
//   vext3: external plant input at the three stage times t, t+h/2, t+h
//          (nullptr means zero); layer readouts are added on top.
//   rdel3: reference input r(t+delta+...) at the stage times; may be null
//          only when there are no layers.
//
// Layer states advance in place; the plant state is committed.  Returns the
// total plant input evaluated at the first stage (for recording).  Throws
// DivergedError when the new state is non-finite or exceeds the guard.
inline Vec coupled_rk4_step(Plant& plant, std::vector<Esn>& layers,
                            const Vec* vext3, const Vec* rdel3, double h,
                            double t_now, CoupledWorkspace& ws,
                            double guard = 0.0, double actuator_limit = 0.0) {
  const int pd = plant.state_dim();
  ws.ensure(pd, layers, plant.input_dim());
  const Vec& x0 = plant.state();
  Vec v0;

  auto eval_v = [&](int stage, const std::vector<Vec>& ustage, Vec& v) {
    if (vext3)
      v = vext3[stage];
    else
      v.setZero();
    for (size_t i = 0; i < layers.size(); ++i) {
      layers[i].readout_into(ustage[i], ws.du);
      v += ws.du;
    }
    if (actuator_limit > 0.0)
      v = v.cwiseMax(-actuator_limit).cwiseMin(actuator_limit);
  };

  auto stages = [&](int stage, const Vec& x, const std::vector<Vec>& ustage,
                    double offset, Vec& kx, std::vector<Vec>& ku) {
    eval_v(stage, ustage, ws.v);
    if (stage == 0) v0 = ws.v;
    plant.deriv(x, offset, ws.v, kx);
    if (!layers.empty()) {
      plant.observe(x, ws.y);
      for (size_t i = 0; i < layers.size(); ++i)
        layers[i].derivative(ustage[i], ws.y, rdel3[stage], ku[i]);
    }
  };

  std::vector<Vec>& u0 = ws.u0;
  for (size_t i = 0; i < layers.size(); ++i) u0[i] = layers[i].state();

  stages(0, x0, u0, 0.0, ws.kx1, ws.ku1);
  ws.xs = x0 + (0.5 * h) * ws.kx1;
  for (size_t i = 0; i < layers.size(); ++i)
    ws.us[i] = u0[i] + (0.5 * h) * ws.ku1[i];
  stages(1, ws.xs, ws.us, 0.5 * h, ws.kx2, ws.ku2);
  ws.xs = x0 + (0.5 * h) * ws.kx2;
  for (size_t i = 0; i < layers.size(); ++i)
    ws.us[i] = u0[i] + (0.5 * h) * ws.ku2[i];
  stages(1, ws.xs, ws.us, 0.5 * h, ws.kx3, ws.ku3);
  ws.xs = x0 + h * ws.kx3;
  for (size_t i = 0; i < layers.size(); ++i)
    ws.us[i] = u0[i] + h * ws.ku3[i];
  stages(2, ws.xs, ws.us, h, ws.kx4, ws.ku4);

  ws.xs = x0 + (h / 6.0) * (ws.kx1 + 2.0 * ws.kx2 + 2.0 * ws.kx3 + ws.kx4);
  if (!ws.xs.allFinite() ||
      (guard > 0.0 && ws.xs.cwiseAbs().maxCoeff() > guard)) {
    std::ostringstream msg;
    msg << "controlled system diverged at t=" << t_now;
    throw DivergedError(t_now, msg.str());
  }
  for (size_t i = 0; i < layers.size(); ++i) {
    layers[i].state() +=
        (h / 6.0) * (ws.ku1[i] + 2.0 * ws.ku2[i] + 2.0 * ws.ku3[i] + ws.ku4[i]);
    if (!layers[i].state().allFinite()) {
      std::ostringstream msg;
      msg << "reservoir state diverged at t=" << t_now;
      throw DivergedError(t_now, msg.str());
    }
  }
  plant.commit(ws.xs, h);
  return v0;
}

}  // namespace rcc
