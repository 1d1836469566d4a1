#include "training.hpp"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "csvio.hpp"
#include "integrate.hpp"
#include "numerics.hpp"

namespace rcc {

void TrainingRecord::export_csv(const std::string& path) const {
  nlohmann::json meta = {{"h", h},
                         {"delta", delta},
                         {"shift_steps", shift_steps},
                         {"discard", discard},
                         {"train_end", train_end}};
  std::vector<std::string> header = {"t"};
  const int m = static_cast<int>(y.rows());
  const int l = static_cast<int>(v.rows());
  for (int i = 0; i < m; ++i) header.push_back("y" + std::to_string(i + 1));
  for (int i = 0; i < m; ++i)
    header.push_back("y" + std::to_string(i + 1) + "_shifted");
  for (int i = 0; i < l; ++i) header.push_back("v" + std::to_string(i + 1));
  CsvWriter out(path, header, meta.dump());
  std::vector<double> row(header.size());
  for (long i = 0; i < triplets(); ++i) {
    size_t c = 0;
    row[c++] = static_cast<double>(i) * h;
    for (int j = 0; j < m; ++j) row[c++] = y(j, i);
    for (int j = 0; j < m; ++j) row[c++] = y(j, i + shift_steps);
    for (int j = 0; j < l; ++j) row[c++] = v(j, i);
    out.row(row);
  }
}

TrainingRecord TrainingRecord::import_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "record: cannot open " + path, ErrorCode::Io);
  std::string first;
  std::getline(in, first);
  require(first.size() > 2 && first[0] == '#',
          "record: missing metadata comment in " + path, ErrorCode::Io);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(first.substr(1));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io,
                std::string("record: bad metadata in ") + path + ": " + e.what());
  }
  in.close();

  CsvTable table = read_csv(path);
  TrainingRecord rec;
  rec.h = meta.at("h").get<double>();
  rec.delta = meta.at("delta").get<double>();
  rec.shift_steps = meta.at("shift_steps").get<long>();
  rec.discard = meta.at("discard").get<long>();
  rec.train_end = meta.at("train_end").get<long>();
  const size_t ncols = table.header.size();
  int m = 0, l = 0;
  for (const auto& name : table.header) {
    if (name.rfind("y", 0) == 0 && name.find("_shifted") == std::string::npos)
      ++m;
    if (name.rfind("v", 0) == 0) ++l;
  }
  require(m >= 1 && l >= 1 && ncols == 1 + 2 * static_cast<size_t>(m) +
                                           static_cast<size_t>(l),
          "record: unexpected column layout in " + path, ErrorCode::Io);
  const long rows = static_cast<long>(table.rows.size());
  const long nodes = rows + rec.shift_steps;
  rec.y.resize(m, nodes);
  rec.v.resize(l, nodes);
  rec.v.setZero();
  for (long i = 0; i < rows; ++i) {
    const auto& row = table.rows[static_cast<size_t>(i)];
    for (int j = 0; j < m; ++j) rec.y(j, i) = row[1 + static_cast<size_t>(j)];
    for (int j = 0; j < m; ++j)
      rec.y(j, i + rec.shift_steps) =
          row[1 + static_cast<size_t>(m + j)];
    for (int j = 0; j < l; ++j)
      rec.v(j, i) = row[1 + 2 * static_cast<size_t>(m) + static_cast<size_t>(j)];
  }
  return rec;
}

TrainingRecord harvest(Plant& plant, const SampledSignal& signal,
                       const ControlTimescales& times,
                       std::optional<double> duration) {
  times.validate();
  const double h = signal.h;
  require(h > 0, "harvest: signal must carry a sample step");
  require(signal.channels() == plant.input_dim(),
          "harvest: signal channels must match plant inputs");
  const double dur =
      duration.value_or(times.t_train + times.test_window()) + times.delta;
  const long n_steps = static_cast<long>(std::llround(dur / h));
  require(signal.samples() >= n_steps + 1,
          "harvest: signal shorter than the requested duration");

  TrainingRecord rec;
  rec.h = h;
  rec.delta = times.delta;
  rec.shift_steps = static_cast<long>(std::llround(times.delta / h));
  require(rec.shift_steps >= 1 &&
              std::abs(times.delta - static_cast<double>(rec.shift_steps) * h) <
                  1e-9 * std::max(1.0, times.delta),
          "harvest: delta/h must be a positive integer");
  rec.discard = static_cast<long>(std::llround(times.t_init / h));
  rec.train_end = static_cast<long>(std::llround(times.t_train / h));

  const int m = plant.obs_dim();
  const int l = plant.input_dim();
  rec.y.resize(m, n_steps + 1);
  rec.v.resize(l, n_steps + 1);

  static thread_local CoupledWorkspace ws;
  static thread_local std::vector<Esn> no_layers;
  Vec y(m);
  Vec vext3[3];
  const double guard = 10.0 * plant.attractor_bound();
  for (long i = 0; i < n_steps; ++i) {
    plant.observe(plant.state(), y);
    rec.y.col(i) = y;
    rec.v.col(i) = signal.at(i);
    vext3[0] = signal.at(i);
    vext3[1] = 0.5 * (signal.at(i) + signal.at(i + 1));
    vext3[2] = signal.at(i + 1);
    coupled_rk4_step(plant, no_layers, vext3, nullptr, h,
                     static_cast<double>(i) * h, ws, guard);
  }
  plant.observe(plant.state(), y);
  rec.y.col(n_steps) = y;
  rec.v.col(n_steps) = signal.at(n_steps);
  return rec;
}

namespace {

// accumulates integral-style sums for one evaluation window
struct WindowStats {
  Mat uut, vut;
  Vec usum;     // trapezoid-weighted sum of states
  Vec vsum, v2sum;
  double svv = 0.0;   // sum w |v|^2
  double wtot = 0.0;  // sum of weights
  long i0 = 0, i1 = 0;

  void init(int n, int l, long a, long b) {
    uut = Mat::Zero(n, n);
    vut = Mat::Zero(l, n);
    usum = Vec::Zero(n);
    vsum = Vec::Zero(l);
    v2sum = Vec::Zero(l);
    i0 = a;
    i1 = b;
  }
  double weight(long i) const { return (i == i0 || i == i1) ? 0.5 : 1.0; }
};

}  // namespace

TrainDiagnostics train_readout(Esn& esn, const TrainingRecord& record,
                               double beta, const TrainOptions& opts) {
  const int n = esn.n_nodes();
  const int m = static_cast<int>(record.y.rows());
  const int l = static_cast<int>(record.v.rows());
  require(esn.obs_dim() == m && esn.input_dim() == l,
          "train_readout: reservoir dimensions do not match the record");
  const long last = record.triplets() - 1;  // last integrable node index
  require(record.discard < record.train_end && record.train_end <= last,
          "train_readout: record does not cover the training window");

  // optional measurement noise on the recorded observables only
  Mat ynoisy;
  const Mat* ysrc = &record.y;
  if (opts.measurement_noise > 0.0) {
    Rng rng(opts.noise_seed, 0xd17de5);
    ynoisy = record.y;
    for (long j = 0; j < ynoisy.cols(); ++j)
      for (int i = 0; i < m; ++i)
        ynoisy(i, j) += opts.measurement_noise * rng.normal();
    ysrc = &ynoisy;
  }
  const Mat& ys = *ysrc;
  const long shift = record.shift_steps;
  const double h = record.h;

  GramAccumulator ridge(n, l);
  WindowStats train_w, test_w;
  train_w.init(n, l, record.discard, record.train_end);
  test_w.init(n, l, record.train_end, last);

  Vec u = Vec::Zero(n);
  Vec k1(n), k2(n), k3(n), k4(n), ustage(n);
  Vec y0(m), y1(m), ym(m), r0(m), r1(m), rm(m);
  Mat ubuf_train_end;

  auto window_add = [&](WindowStats& wdw, long i, const Vec& uu) {
    const double w = wdw.weight(i);
    wdw.uut.selfadjointView<Eigen::Lower>().rankUpdate(uu, w);
    wdw.vut.noalias() += w * record.v.col(i) * uu.transpose();
    wdw.usum += w * uu;
    wdw.vsum += w * record.v.col(i);
    wdw.v2sum += w * record.v.col(i).cwiseAbs2();
    wdw.svv += w * record.v.col(i).squaredNorm();
    wdw.wtot += w;
  };

  auto collect = [&](long i, const Vec& uu) {
    if (i >= record.discard && i <= record.train_end) {
      ridge.add(uu, record.v.col(i));
      window_add(train_w, i, uu);
    }
    if (i >= record.train_end && i <= last) window_add(test_w, i, uu);
  };

  collect(0, u);
  for (long i = 0; i < last; ++i) {
    y0 = ys.col(i);
    y1 = ys.col(i + 1);
    ym = 0.5 * (y0 + y1);
    r0 = ys.col(i + shift);
    r1 = ys.col(i + 1 + shift);
    rm = 0.5 * (r0 + r1);
    esn.derivative(u, y0, r0, k1);
    ustage = u + (0.5 * h) * k1;
    esn.derivative(ustage, ym, rm, k2);
    ustage = u + (0.5 * h) * k2;
    esn.derivative(ustage, ym, rm, k3);
    ustage = u + h * k3;
    esn.derivative(ustage, y1, r1, k4);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    collect(i + 1, u);
  }

  require(train_w.uut.trace() > 0.0,
          "train_readout: all-zero reservoir response",
          ErrorCode::RankDeficient);

  Mat uut = ridge.uut();
  Mat vut = ridge.vut();
  Mat wout = ridge_solve_gram(uut, vut, beta);
  esn.set_w_out(wout);

  auto nrmse_from = [&](const WindowStats& wdw, bool normalize_by_vhat) {
    Mat uut_full = wdw.uut;
    uut_full.triangularView<Eigen::StrictlyUpper>() = uut_full.transpose();
    const double t_span = wdw.wtot;  // in samples; h cancels in the ratio
    const double sse = wdw.svv - 2.0 * (wout.array() * wdw.vut.array()).sum() +
                       (wout * uut_full * wout.transpose()).trace();
    double var_sum;
    if (!normalize_by_vhat) {
      var_sum = 0.0;
      for (int ch = 0; ch < l; ++ch) {
        const double mean = wdw.vsum(ch) / t_span;
        var_sum += wdw.v2sum(ch) / t_span - mean * mean;
      }
    } else {
      var_sum = 0.0;
      const Vec vh_mean = wout * (wdw.usum / t_span);
      const Mat second = wout * uut_full * wout.transpose() / t_span;
      for (int ch = 0; ch < l; ++ch)
        var_sum += second(ch, ch) - vh_mean(ch) * vh_mean(ch);
    }
    require(var_sum > 0.0,
            "inversion error: zero variance in the normalization window",
            ErrorCode::UndefinedMetric);
    return std::sqrt(std::max(0.0, sse) / (t_span * var_sum));
  };

  TrainDiagnostics diag;
  diag.train_nrmse = nrmse_from(train_w, false);
  if (last > record.train_end) {
    diag.test_nrmse = nrmse_from(test_w, false);
    diag.test_nrmse_var_v = nrmse_from(test_w, true);
  } else {
    diag.test_nrmse = std::numeric_limits<double>::quiet_NaN();
    diag.test_nrmse_var_v = diag.test_nrmse;
  }
  diag.w_out_max_abs = wout.cwiseAbs().maxCoeff();
  diag.final_state = u;
  return diag;
}

Mat replay_readout(const Esn& esn, const TrainingRecord& record,
                   const TrainOptions& opts) {
  require(esn.trained(), "replay: readout not trained", ErrorCode::Untrained);
  const int n = esn.n_nodes();
  const int m = static_cast<int>(record.y.rows());
  Mat ynoisy;
  const Mat* ysrc = &record.y;
  if (opts.measurement_noise > 0.0) {
    Rng rng(opts.noise_seed, 0xd17de5);
    ynoisy = record.y;
    for (long j = 0; j < ynoisy.cols(); ++j)
      for (int i = 0; i < m; ++i)
        ynoisy(i, j) += opts.measurement_noise * rng.normal();
    ysrc = &ynoisy;
  }
  const Mat& ys = *ysrc;
  const long shift = record.shift_steps;
  const long last = record.triplets() - 1;
  const double h = record.h;

  Mat vhat(esn.input_dim(), last + 1);
  Vec u = Vec::Zero(n);
  Vec k1(n), k2(n), k3(n), k4(n), ustage(n), vrow(esn.input_dim());
  esn.readout_into(u, vrow);
  vhat.col(0) = vrow;
  for (long i = 0; i < last; ++i) {
    Vec y0 = ys.col(i), y1 = ys.col(i + 1);
    Vec ym = 0.5 * (y0 + y1);
    Vec r0 = ys.col(i + shift), r1 = ys.col(i + 1 + shift);
    Vec rm = 0.5 * (r0 + r1);
    esn.derivative(u, y0, r0, k1);
    ustage = u + (0.5 * h) * k1;
    esn.derivative(ustage, ym, rm, k2);
    ustage = u + (0.5 * h) * k2;
    esn.derivative(ustage, ym, rm, k3);
    ustage = u + h * k3;
    esn.derivative(ustage, y1, r1, k4);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    esn.readout_into(u, vrow);
    vhat.col(i + 1) = vrow;
  }
  return vhat;
}

double inversion_error(const Mat& v, const Mat& v_train, double h, long i0,
                       long i1) {
  require(v.rows() == v_train.rows(), "inversion_error: channel mismatch");
  require(i0 >= 0 && i1 > i0 && i1 < v.cols() && i1 < v_train.cols(),
          "inversion_error: window out of range");
  double sse = 0.0;
  Vec vsum = Vec::Zero(v.rows());
  Vec v2sum = Vec::Zero(v.rows());
  double wtot = 0.0;
  for (long i = i0; i <= i1; ++i) {
    const double w = (i == i0 || i == i1) ? 0.5 : 1.0;
    sse += w * (v.col(i) - v_train.col(i)).squaredNorm();
    vsum += w * v_train.col(i);
    v2sum += w * v_train.col(i).cwiseAbs2();
    wtot += w;
  }
  double var_sum = 0.0;
  for (int ch = 0; ch < v.rows(); ++ch) {
    const double mean = vsum(ch) / wtot;
    var_sum += v2sum(ch) / wtot - mean * mean;
  }
  require(var_sum > 0.0,
          "inversion error: zero variance in the normalization window",
          ErrorCode::UndefinedMetric);
  return std::sqrt(sse / (wtot * var_sum));
}

}  // namespace rcc
