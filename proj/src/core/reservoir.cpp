#include "reservoir.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <vector>

#include "numerics.hpp"

namespace rcc {

using nlohmann::json;

void EsnHyperparams::validate() const {
  require(n_nodes >= 1, "esn: N must be >= 1");
  require(spectral_radius > 0, "esn: spectral radius must be positive");
  require(mean_degree >= 1 && mean_degree <= n_nodes,
          "esn: mean degree k must lie in [1, N]");
  require(input_scale >= 0, "esn: input scale must be non-negative");
  require(bias_halfrange >= 0, "esn: bias half-range must be non-negative");
  require(time_constant > 0, "esn: time constant must be positive");
}

Esn Esn::instantiate(const EsnHyperparams& params, int obs_dim,
                     int input_dim) {
  params.validate();
  require(obs_dim >= 1, "esn: observable dimension must be >= 1");
  require(input_dim >= 1, "esn: input dimension must be >= 1");

  const int n = params.n_nodes;
  Esn esn;
  esn.params_ = params;
  esn.obs_dim_ = obs_dim;
  esn.input_dim_ = input_dim;

  const double p_nonzero = params.mean_degree / static_cast<double>(n);
  for (int stream = 0;; ++stream) {
    Rng rng(params.seed, static_cast<uint64_t>(stream));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(params.mean_degree * n * 1.3) + 8);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double coin = rng.uniform();
        const double val = rng.uniform(-1.0, 1.0);
        if (coin < p_nonzero) trips.emplace_back(i, j, val);
      }
    SpMat w(n, n);
    w.setFromTriplets(trips.begin(), trips.end());
    const double rho0 = spectral_radius(w);
    if (rho0 <= 0.0) {
      esn.redraws_ = stream + 1;  // pathological draw; try the next stream
      continue;
    }
    esn.w_ = w * (params.spectral_radius / rho0);

    esn.w_in_y_.resize(n, obs_dim);
    esn.w_in_r_.resize(n, obs_dim);
    esn.bias_.resize(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < obs_dim; ++j)
        esn.w_in_y_(i, j) = rng.uniform(-params.input_scale, params.input_scale);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < obs_dim; ++j)
        esn.w_in_r_(i, j) = rng.uniform(-params.input_scale, params.input_scale);
    for (int i = 0; i < n; ++i)
      esn.bias_(i) = params.bias_mean +
                     rng.uniform(-params.bias_halfrange, params.bias_halfrange);
    break;
  }
  esn.state_ = Vec::Zero(n);
  return esn;
}

void Esn::derivative(const Vec& u, const Vec& y, const Vec& r_delta,
                     Vec& out) const {
  out.noalias() = w_ * u;
  out.noalias() += w_in_y_ * y;
  out.noalias() += w_in_r_ * r_delta;
  out += bias_;
  out = ((-u).array() + out.array().tanh()) / params_.time_constant;
}

Vec Esn::readout() const {
  Vec v;
  readout_into(state_, v);
  return v;
}

void Esn::readout_into(const Vec& u, Vec& out) const {
  require(trained(), "esn: readout used before training",
          ErrorCode::Untrained);
  out.noalias() = (*w_out_) * u;
}

const Mat& Esn::w_out() const {
  require(trained(), "esn: readout weights not trained",
          ErrorCode::Untrained);
  return *w_out_;
}

void Esn::set_w_out(Mat w) {
  require(w.cols() == params_.n_nodes && w.rows() == input_dim_,
          "esn: readout dimensions must be l x N");
  w_out_ = std::move(w);
}

namespace {

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  return m;
}

}  // namespace

std::string Esn::to_json() const {
  json j;
  j["params"] = {{"n_nodes", params_.n_nodes},
                 {"spectral_radius", params_.spectral_radius},
                 {"mean_degree", params_.mean_degree},
                 {"input_scale", params_.input_scale},
                 {"bias_mean", params_.bias_mean},
                 {"bias_halfrange", params_.bias_halfrange},
                 {"time_constant", params_.time_constant},
                 {"seed", params_.seed}};
  j["obs_dim"] = obs_dim_;
  j["input_dim"] = input_dim_;
  j["redraws"] = redraws_;
  json trips = json::array();
  for (int k = 0; k < w_.outerSize(); ++k)
    for (SpMat::InnerIterator it(w_, k); it; ++it)
      trips.push_back({it.row(), it.col(), it.value()});
  j["w"] = {{"n", params_.n_nodes}, {"triplets", std::move(trips)}};
  j["w_in_y"] = mat_to_json(w_in_y_);
  j["w_in_r"] = mat_to_json(w_in_r_);
  json b = json::array();
  for (int i = 0; i < bias_.size(); ++i) b.push_back(bias_(i));
  j["bias"] = std::move(b);
  if (w_out_) j["w_out"] = mat_to_json(*w_out_);
  return j.dump();
}

Esn Esn::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("esn: bad JSON: ") + e.what());
  }
  Esn esn;
  const auto& p = j.at("params");
  esn.params_.n_nodes = p.at("n_nodes").get<int>();
  esn.params_.spectral_radius = p.at("spectral_radius").get<double>();
  esn.params_.mean_degree = p.at("mean_degree").get<double>();
  esn.params_.input_scale = p.at("input_scale").get<double>();
  esn.params_.bias_mean = p.at("bias_mean").get<double>();
  esn.params_.bias_halfrange = p.at("bias_halfrange").get<double>();
  esn.params_.time_constant = p.at("time_constant").get<double>();
  esn.params_.seed = p.at("seed").get<uint64_t>();
  esn.obs_dim_ = j.at("obs_dim").get<int>();
  esn.input_dim_ = j.at("input_dim").get<int>();
  esn.redraws_ = j.value("redraws", 0);
  const int n = esn.params_.n_nodes;
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& t : j.at("w").at("triplets"))
    trips.emplace_back(t[0].get<int>(), t[1].get<int>(), t[2].get<double>());
  esn.w_.resize(n, n);
  esn.w_.setFromTriplets(trips.begin(), trips.end());
  esn.w_in_y_ = mat_from_json(j.at("w_in_y"));
  esn.w_in_r_ = mat_from_json(j.at("w_in_r"));
  const auto& b = j.at("bias");
  esn.bias_.resize(static_cast<long>(b.size()));
  for (long i = 0; i < esn.bias_.size(); ++i) esn.bias_(i) = b[i].get<double>();
  if (j.contains("w_out")) esn.w_out_ = mat_from_json(j.at("w_out"));
  esn.state_ = Vec::Zero(n);
  return esn;
}

void Esn::save(const std::string& path) const {
  std::ofstream out(path);
  require(out.good(), "esn: cannot open " + path + " for writing",
          ErrorCode::Io);
  out << to_json() << "\n";
}

Esn Esn::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "esn: cannot open " + path, ErrorCode::Io);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace rcc
