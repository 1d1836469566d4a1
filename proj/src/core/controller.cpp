#include "controller.hpp"

#include <cmath>

#include "integrate.hpp"

namespace rcc {

namespace {

double error_integral(const ControlRunResult& res, double window, double skip,
                      bool squared) {
  const double start = res.settle + skip;
  const long i0 = static_cast<long>(std::llround(start / res.h));
  long i1;
  if (window > 0.0) {
    i1 = i0 + static_cast<long>(std::llround(window / res.h));
  } else {
    i1 = res.samples() - 1;
  }
  require(i0 >= 0 && i1 > i0 && i1 <= res.samples() - 1,
          "control_error: window exceeds the recorded trajectory");
  double acc = 0.0, wtot = 0.0;
  for (long i = i0; i <= i1; ++i) {
    const double w = (i == i0 || i == i1) ? 0.5 : 1.0;
    const double e = (res.y.col(i) - res.r.col(i)).norm();
    acc += w * (squared ? e * e : e);
    wtot += w;
  }
  return acc / wtot;
}

}  // namespace

double ControlRunResult::control_error(double window, double skip) const {
  return error_integral(*this, window, skip, false);
}

double ControlRunResult::control_rmse(double window, double skip) const {
  return std::sqrt(error_integral(*this, window, skip, true));
}

ControlRunResult closed_loop_run(Plant& plant, DeepController& controller,
                                 const Reference& reference, double duration,
                                 double h, const RunOptions& opts) {
  require(h > 0 && duration > 0, "closed_loop_run: positive duration and h");
  require(!controller.layers().empty() || controller.layer_count() == 0,
          "closed_loop_run: inconsistent controller");
  const int m = plant.obs_dim();
  const int l = plant.input_dim();
  for (const auto& esn : controller.layers()) {
    require(esn.trained(), "closed_loop_run: every layer must be trained",
            ErrorCode::Untrained);
    require(esn.obs_dim() == m && esn.input_dim() == l,
            "closed_loop_run: layer dimensions do not match the plant");
  }
  require(reference.valid() && reference.dim() == m,
          "closed_loop_run: reference dimension must match the observable");

  const long n_steps = static_cast<long>(std::llround(duration / h));
  const double delta = controller.delta();

  ControlRunResult res;
  res.h = h;
  res.t0 = opts.t0;
  double settle = opts.settle;
  if (settle <= 0.0) {
    double cmax = 0.0;
    for (const auto& esn : controller.layers())
      cmax = std::max(cmax, esn.time_constant());
    settle = 5.0 * cmax;
  }
  res.settle = settle;
  res.y.resize(m, n_steps + 1);
  res.r.resize(m, n_steps + 1);
  res.v.resize(l, n_steps + 1);
  if (opts.record_per_layer)
    res.v_layers.assign(controller.layers().size(), Mat(l, n_steps + 1));

  static thread_local CoupledWorkspace ws;
  Vec y(m), vnode(l), tmp(l);
  Vec rdel3[3], vext3[3];
  const bool have_extra = opts.extra_input != nullptr;
  const double guard = 10.0 * plant.attractor_bound();

  Vec rr(m);
  auto record_node = [&](long i) {
    plant.observe(plant.state(), y);
    res.y.col(i) = y;
    const double t_abs = opts.t0 + static_cast<double>(i) * h;
    reference.eval(t_abs, rr);
    res.r.col(i) = rr;
    if (opts.record_per_layer) {
      for (size_t k = 0; k < controller.layers().size(); ++k) {
        controller.layers()[k].readout_into(controller.layers()[k].state(),
                                            tmp);
        res.v_layers[k].col(i) = tmp;
      }
    }
  };

  for (long i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) * h;
    const double t_abs = opts.t0 + t;
    record_node(i);
    for (int s = 0; s < 3; ++s) {
      const double off = s == 0 ? 0.0 : (s == 1 ? 0.5 * h : h);
      rdel3[s].resize(m);
      reference.eval(t_abs + delta + off, rdel3[s]);
    }
    if (have_extra) {
      vext3[0] = opts.extra_input->at(i);
      vext3[1] = 0.5 * (opts.extra_input->at(i) + opts.extra_input->at(i + 1));
      vext3[2] = opts.extra_input->at(i + 1);
    }
    vnode = coupled_rk4_step(plant, controller.layers(),
                             have_extra ? vext3 : nullptr, rdel3, h, t_abs, ws,
                             guard, opts.actuator_limit);
    res.v.col(i) = vnode;
  }
  record_node(n_steps);
  // final-node control value from the final states
  vnode = controller.control(l);
  if (have_extra) vnode += opts.extra_input->at(n_steps);
  if (opts.actuator_limit > 0.0)
    vnode = vnode.cwiseMax(-opts.actuator_limit).cwiseMin(opts.actuator_limit);
  res.v.col(n_steps) = vnode;
  return res;
}

AddLayerResult add_layer(Plant& plant, DeepController& controller,
                         const EsnHyperparams& esn_params,
                         const TrainSignalParams& signal_params,
                         const ControlTimescales& times,
                         const Reference& reference,
                         const RunOptions& run_opts,
                         const TrainOptions& train_opts,
                         bool harvest_test_window) {
  times.validate();
  const double h = plant.default_step();
  const double duration = times.t_train +
                          (harvest_test_window ? times.test_window() : 0.0) +
                          times.delta;
  const long n_steps = static_cast<long>(std::llround(duration / h));

  Rng rng(signal_params.seed);
  SampledSignal sig = gen_train_signal(signal_params, plant.input_dim(),
                                       n_steps + 1, h, rng);

  RunOptions harvest_opts = run_opts;
  harvest_opts.extra_input = &sig;
  ControlRunResult run;
  try {
    run = closed_loop_run(plant, controller, reference, duration, h,
                          harvest_opts);
  } catch (const DivergedError& e) {
    throw DivergedError(e.time(),
                        std::string("add_layer: plant diverged under the "
                                    "training perturbation: ") +
                            e.what());
  }

  AddLayerResult out;
  out.record.h = h;
  out.record.delta = times.delta;
  out.record.shift_steps = static_cast<long>(std::llround(times.delta / h));
  out.record.discard = static_cast<long>(std::llround(times.t_init / h));
  out.record.train_end = static_cast<long>(std::llround(times.t_train / h));
  out.record.y = run.y;
  out.record.v = sig.values.leftCols(n_steps + 1);

  Esn esn = Esn::instantiate(esn_params, plant.obs_dim(), plant.input_dim());
  out.diagnostics = train_readout(esn, out.record, times.beta, train_opts);
  esn.state() = out.diagnostics.final_state;  // warm start into control
  controller.add_trained_layer(std::move(esn));
  return out;
}

}  // namespace rcc
