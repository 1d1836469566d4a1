#include "config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace rcc {

using nlohmann::json;

void ExperimentConfig::validate() const {
  require(plant.kind == "mackey_glass" || plant.kind == "lorenz" ||
              plant.kind == "circuit",
          "config: unknown plant kind '" + plant.kind + "'",
          ErrorCode::Config);
  esn.validate();
  times.validate();
  signal.validate();
  require(layers.count >= 0, "config: layer count must be >= 0",
          ErrorCode::Config);
  require(reference.kind == "uss" || reference.kind == "constant" ||
              reference.kind == "square" || reference.kind == "ellipse",
          "config: unknown reference kind '" + reference.kind + "'",
          ErrorCode::Config);
  if (reference.kind == "square")
    require(reference.period > 0, "config: square reference needs a period",
            ErrorCode::Config);
  require(run.seeds >= 1, "config: need at least one seed",
          ErrorCode::Config);
}

std::string ExperimentConfig::to_json(int indent) const {
  json j;
  j["name"] = name;
  j["plant"] = {{"kind", plant.kind},
                {"h", plant.h},
                {"burn_in", plant.burn_in},
                {"circuit_full_inputs", plant.circuit_full_inputs},
                {"initial", plant.initial}};
  j["esn"] = {{"n", esn.n_nodes},
              {"rho", esn.spectral_radius},
              {"k", esn.mean_degree},
              {"sigma", esn.input_scale},
              {"b_mean", esn.bias_mean},
              {"b_max", esn.bias_halfrange},
              {"c", esn.time_constant}};
  j["times"] = {{"delta", times.delta},
                {"t_init", times.t_init},
                {"t_train", times.t_train},
                {"t_test", times.t_test},
                {"beta", times.beta}};
  j["signal"] = {{"lambda", signal.lambda}, {"p", signal.amplitude}};
  j["layers"] = {{"count", layers.count}, {"n", layers.n_nodes}};
  j["reference"] = {{"kind", reference.kind},
                    {"value", reference.value},
                    {"period", reference.period},
                    {"smoothing", reference.smoothing},
                    {"duty", reference.duty},
                    {"ellipse_observe", reference.ellipse_observe}};
  j["control"] = {{"duration", control.duration},
                  {"error_skip", control.error_skip},
                  {"error_window", control.error_window},
                  {"actuator_limit", control.actuator_limit},
                  {"train_noise", control.train_noise}};
  j["fpga"] = {{"int_bits", fpga.int_bits},
               {"input_int_bits", fpga.input_int_bits},
               {"lut_x_max", fpga.lut_x_max},
               {"adc_bits", fpga.adc_bits},
               {"adc_fullscale", fpga.adc_fullscale},
               {"dac_bits", fpga.dac_bits},
               {"dac_fullscale", fpga.dac_fullscale}};
  j["run"] = {{"master_seed", run.master_seed},
              {"seeds", run.seeds},
              {"threads", run.threads}};
  return j.dump(indent);
}

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("config: bad JSON: ") + e.what());
  }
  ExperimentConfig c;
  get_if(j, "name", c.name);
  if (j.contains("plant")) {
    const auto& p = j["plant"];
    get_if(p, "kind", c.plant.kind);
    get_if(p, "h", c.plant.h);
    get_if(p, "burn_in", c.plant.burn_in);
    get_if(p, "circuit_full_inputs", c.plant.circuit_full_inputs);
    get_if(p, "initial", c.plant.initial);
  }
  if (j.contains("esn")) {
    const auto& p = j["esn"];
    get_if(p, "n", c.esn.n_nodes);
    get_if(p, "rho", c.esn.spectral_radius);
    get_if(p, "k", c.esn.mean_degree);
    get_if(p, "sigma", c.esn.input_scale);
    get_if(p, "b_mean", c.esn.bias_mean);
    get_if(p, "b_max", c.esn.bias_halfrange);
    get_if(p, "c", c.esn.time_constant);
  }
  if (j.contains("times")) {
    const auto& p = j["times"];
    get_if(p, "delta", c.times.delta);
    get_if(p, "t_init", c.times.t_init);
    get_if(p, "t_train", c.times.t_train);
    get_if(p, "t_test", c.times.t_test);
    get_if(p, "beta", c.times.beta);
  }
  if (j.contains("signal")) {
    const auto& p = j["signal"];
    get_if(p, "lambda", c.signal.lambda);
    get_if(p, "p", c.signal.amplitude);
  }
  if (j.contains("layers")) {
    const auto& p = j["layers"];
    get_if(p, "count", c.layers.count);
    get_if(p, "n", c.layers.n_nodes);
  }
  if (j.contains("reference")) {
    const auto& p = j["reference"];
    get_if(p, "kind", c.reference.kind);
    get_if(p, "value", c.reference.value);
    get_if(p, "period", c.reference.period);
    get_if(p, "smoothing", c.reference.smoothing);
    get_if(p, "duty", c.reference.duty);
    get_if(p, "ellipse_observe", c.reference.ellipse_observe);
  }
  if (j.contains("control")) {
    const auto& p = j["control"];
    get_if(p, "duration", c.control.duration);
    get_if(p, "error_skip", c.control.error_skip);
    get_if(p, "error_window", c.control.error_window);
    get_if(p, "actuator_limit", c.control.actuator_limit);
    get_if(p, "train_noise", c.control.train_noise);
  }
  if (j.contains("fpga")) {
    const auto& p = j["fpga"];
    get_if(p, "int_bits", c.fpga.int_bits);
    get_if(p, "input_int_bits", c.fpga.input_int_bits);
    get_if(p, "lut_x_max", c.fpga.lut_x_max);
    get_if(p, "adc_bits", c.fpga.adc_bits);
    get_if(p, "adc_fullscale", c.fpga.adc_fullscale);
    get_if(p, "dac_bits", c.fpga.dac_bits);
    get_if(p, "dac_fullscale", c.fpga.dac_fullscale);
  }
  if (j.contains("run")) {
    const auto& p = j["run"];
    get_if(p, "master_seed", c.run.master_seed);
    get_if(p, "seeds", c.run.seeds);
    get_if(p, "threads", c.run.threads);
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_ini(const std::string& text) {
  // translate [section] key = value lines into the JSON schema
  json j = json::object();
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']',
              "config: bad section header at line " + std::to_string(lineno),
              ErrorCode::Config);
      section = strip(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos,
            "config: expected key = value at line " + std::to_string(lineno),
            ErrorCode::Config);
    const std::string key = strip(line.substr(0, eq));
    const std::string val = strip(line.substr(eq + 1));
    json parsed;
    if (val == "true" || val == "false") {
      parsed = (val == "true");
    } else if (!val.empty() && val.front() == '[') {
      try {
        parsed = json::parse(val);
      } catch (const json::exception&) {
        throw Error(ErrorCode::Config,
                    "config: bad list value at line " + std::to_string(lineno));
      }
    } else {
      try {
        size_t pos = 0;
        const double d = std::stod(val, &pos);
        if (pos == val.size())
          parsed = d;
        else
          parsed = val;
      } catch (const std::exception&) {
        parsed = val;
      }
    }
    if (section.empty())
      j[key] = parsed;
    else
      j[section][key] = parsed;
  }
  // integer-typed fields arrive as doubles from the INI parser
  for (const char* sec : {"esn", "layers", "fpga", "run"})
    if (j.contains(sec))
      for (auto& [k, v] : j[sec].items())
        if (v.is_number_float()) {
          const double d = v.get<double>();
          // keep true floats (rho, sigma, ...) as-is
          if (d == static_cast<double>(static_cast<long long>(d)) &&
              (std::string(k) == "n" || k == "count" || k == "seeds" ||
               k == "threads" || k == "master_seed" || k == "int_bits" ||
               k == "input_int_bits" || k == "adc_bits" || k == "dac_bits"))
            v = static_cast<long long>(d);
        }
  return from_json(j.dump());
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "config: cannot open " + path, ErrorCode::Io);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return from_json(text);
  return from_ini(text);
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "mackey-glass-uss") {
    c.plant.kind = "mackey_glass";
    c.plant.h = 0.1;
    c.plant.burn_in = 100.0;
    c.esn = {100, 1.15, 10, 1.0, 0.0, 1.0, 0.6, 0};
    c.times = {0.6, 100.0, 1500.0, 500.0, 1e-8};
    c.signal = {0.6, 0.1, 0};
    c.layers = {1, 0};
    c.reference.kind = "uss";
    c.control.duration = 300.0;
    c.control.error_skip = 147.0;  // evaluate the second half of the phase
  } else if (name == "lorenz-uss" || name == "lorenz-n200") {
    c.plant.kind = "lorenz";
    c.plant.h = 1e-3;
    c.plant.burn_in = 25.0;
    c.esn = {200, 0.9, 20, 0.05, 0.0, 1.0, 0.01, 0};
    c.times = {0.05, 25.0, 250.0, 0.0, 1e-8};
    c.signal = {0.05, 10.0, 0};
    c.layers = {1, 0};
    c.reference.kind = "uss";
    c.control.duration = 30.0;
    c.control.error_skip = 19.0;
    c.control.error_window = 10.0;
  } else if (name == "lorenz-deep" || name == "lorenz-n50") {
    c = preset("lorenz-uss");
    c.name = name;
    c.layers = {name == "lorenz-deep" ? 4 : 1, 50};
  } else if (name == "lorenz-ellipse") {
    c = preset("lorenz-uss");
    c.name = name;
    c.layers = {4, 50};
    c.reference.kind = "ellipse";
    c.reference.ellipse_observe = 200.0;
    c.control.duration = 30.0;
  } else if (name == "circuit-sq") {
    c.plant.kind = "circuit";
    c.plant.h = 1.0;
    c.plant.burn_in = 512.0;
    c.esn = {30, 0.9, 3, 0.95, 0.0, 0.5, 24.0, 0};
    c.times = {8.0, 512.0, 8192.0, 0.0, 1e-8};
    c.signal = {24.0, 0.0225, 0};
    c.layers = {2, 0};
    c.reference.kind = "square";
    c.reference.period = 2048.0;
    c.reference.smoothing = 256.0;
    c.control.duration = 4096.0;
    c.control.error_skip = 2048.0 - 5.0 * 24.0;  // settle + skip = one period
    c.control.error_window = 2048.0;             // RMSE over one period
    c.control.actuator_limit = 0.2;
    c.control.train_noise = 0.0131;
  } else {
    throw Error(ErrorCode::Config, "config: unknown preset '" + name + "'");
  }
  c.validate();
  return c;
}

std::vector<std::string> ExperimentConfig::preset_names() {
  return {"mackey-glass-uss", "lorenz-uss", "lorenz-n200", "lorenz-n50",
          "lorenz-deep", "lorenz-ellipse", "circuit-sq"};
}

}  // namespace rcc
