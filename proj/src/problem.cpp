// Copyright 2026 The fxsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fxsynth/problem.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fxsynth/error.hpp"
#include "json.hpp"

namespace fxsynth {

using Json = nlohmann::json;

std::string_view to_string(Mode mode) { return mode == Mode::Pid ? "pid" : "lqg"; }

namespace {

// Field access with the dotted path in every diagnostic.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  Reader at(const char* key) const {
    if (!has(key)) throw ParseError("missing field '" + sub(key) + "'");
    return Reader(j_.at(key), sub(key));
  }
  const Json& json() const { return j_; }
  const std::string& path() const { return path_; }

  double number() const {
    if (j_.is_string()) {
      const std::string s = j_.get<std::string>();
      if (s == "inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    if (!j_.is_number()) throw ParseError("field '" + path_ + "' must be a number");
    return j_.get<double>();
  }
  long integer() const {
    if (!j_.is_number_integer()) throw ParseError("field '" + path_ + "' must be an integer");
    return j_.get<long>();
  }
  std::string string() const {
    if (!j_.is_string()) throw ParseError("field '" + path_ + "' must be a string");
    return j_.get<std::string>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) throw ParseError("field '" + path_ + "' must be true or false");
    return j_.get<bool>();
  }
  std::vector<double> numbers() const {
    if (!j_.is_array()) throw ParseError("field '" + path_ + "' must be an array");
    std::vector<double> v;
    for (std::size_t i = 0; i < j_.size(); ++i) {
      v.push_back(Reader(j_[i], path_ + "[" + std::to_string(i) + "]").number());
    }
    return v;
  }
  Matrix matrix() const {
    if (!j_.is_array() || j_.empty()) {
      throw ParseError("field '" + path_ + "' must be a non-empty array of rows");
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j_.size(); ++i) {
      rows.push_back(Reader(j_[i], path_ + "[" + std::to_string(i) + "]").numbers());
      if (rows.back().size() != rows.front().size()) {
        throw ParseError("field '" + path_ + "' has rows of different lengths");
      }
    }
    return linalg::from_rows(rows);
  }
  std::vector<Interval> box() const {
    if (!j_.is_array()) throw ParseError("field '" + path_ + "' must be an array of [lo, hi]");
    std::vector<Interval> out;
    for (std::size_t i = 0; i < j_.size(); ++i) {
      out.push_back(Reader(j_[i], path_ + "[" + std::to_string(i) + "]").interval());
    }
    return out;
  }
  Interval interval() const {
    const auto v = numbers();
    if (v.size() != 2 || !(v[0] <= v[1]) || !std::isfinite(v[0]) || !std::isfinite(v[1])) {
      throw ParseError("field '" + path_ + "' must be a finite [lo, hi] with lo <= hi");
    }
    return Interval{v[0], v[1]};
  }

 private:
  std::string sub(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }
  const Json& j_;
  std::string path_;
};

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (const auto& row : linalg::to_rows(m)) rows.push_back(row);
  return rows;
}

Json box_json(const std::vector<Interval>& box) {
  Json a = Json::array();
  for (const Interval& i : box) a.push_back({i.lo, i.hi});
  return a;
}

Json gains_json(const GainPair& g) {
  return Json{{"K", matrix_json(g.k)}, {"L", matrix_json(g.l)}};
}

GainPair read_gains(const Reader& r) {
  return GainPair{r.at("K").matrix(), r.at("L").matrix()};
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

void read_swarm(const Reader& r, SwarmConfig& s) {
  if (r.has("particles")) s.particles = static_cast<int>(r.at("particles").integer());
  if (r.has("max_iterations")) s.max_iterations = static_cast<int>(r.at("max_iterations").integer());
  if (r.has("c1")) s.c1 = r.at("c1").number();
  if (r.has("c2")) s.c2 = r.at("c2").number();
  if (r.has("w_max")) s.w_max = r.at("w_max").number();
  if (r.has("y_min")) s.y_min = r.at("y_min").number();
  if (r.has("y_max")) s.y_max = r.at("y_max").number();
  if (r.has("v_max")) s.v_max = r.at("v_max").number();
  if (r.has("stall_window")) s.stall_window = static_cast<int>(r.at("stall_window").integer());
  if (r.has("stall_tolerance")) s.stall_tolerance = r.at("stall_tolerance").number();
  if (r.has("seed")) {
    const long seed = r.at("seed").integer();
    if (seed < 0) throw ParseError("field 'swarm.seed' must be nonnegative");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  if (r.has("per_dimension_random")) s.per_dimension_random = r.at("per_dimension_random").boolean();
}

void require_dims(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                  const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(what) + " is " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()) + ", expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

void ProblemSpec::validate() const {
  plant.validate();
  const Eigen::Index n = plant.states();
  const Eigen::Index m = plant.inputs();
  const Eigen::Index p = plant.outputs();
  const Eigen::Index qd = plant.disturbances();
  if (!(tau > 0) || !std::isfinite(tau)) throw ConfigError("tau must be positive");
  if (bits < 2 || bits > 32) throw ConfigError("bits must lie in [2, 32]");
  if (coeff_bits < 0 || coeff_bits > 32) throw ConfigError("coeff_bits must lie in [0, 32]");
  weights.validate();
  if (q.size() != 0) require_dims(q, n, n, "Q");
  if (r.size() != 0) require_dims(r, m, m, "R");
  if (qhat.size() != 0) require_dims(qhat, qd, qd, "Qhat");
  if (rhat.size() != 0) require_dims(rhat, p, p, "Rhat");
  if (!y_box.empty() && static_cast<Eigen::Index>(y_box.size()) != p) {
    throw DimensionError("y_box needs one interval per output");
  }
  if (!xhat_box.empty() && static_cast<Eigen::Index>(xhat_box.size()) != n) {
    throw DimensionError("xhat_box needs one interval per state");
  }
  swarm.validate();
  if (!simulation.x0.empty() && static_cast<Eigen::Index>(simulation.x0.size()) != n) {
    throw DimensionError("simulation.x0 needs one entry per state");
  }
  if (simulation.steps < 1) throw ConfigError("simulation.steps must be positive");
  for (const auto* g : {&reference_gains, &reference_baseline}) {
    if (!g->has_value()) continue;
    require_dims((*g)->k, m, n, "reference K");
    require_dims((*g)->l, n, p, "reference L");
  }
  if (mode == Mode::Pid) {
    if (m != 1 || p != 1) throw DimensionError("PID mode needs a single-input single-output plant");
    if (pid.xhat_box.size() != 2) throw DimensionError("pid.xhat_box needs two intervals");
    if (pid.constraints.settling_time <= 0 || pid.constraints.max_deviation <= 0) {
      throw ConfigError("PID constraints must be positive");
    }
  }
}

DiscretePlant ProblemSpec::discrete() const { return plant::discretize(plant, tau); }

CostMatrices ProblemSpec::cost_matrices(const DiscretePlant& dp) const {
  CostMatrices w = CostMatrices::identity(dp);
  if (q.size() != 0) w.q = q;
  if (r.size() != 0) w.r = r;
  if (qhat.size() != 0) w.qhat = qhat;
  if (rhat.size() != 0) w.rhat = rhat;
  return w;
}

QuantizationConfig ProblemSpec::quantization(const DiscretePlant& dp) const {
  QuantizationConfig qc = QuantizationConfig::unit_boxes(dp, bits);
  if (!y_box.empty()) qc.y_box = y_box;
  if (!xhat_box.empty()) qc.xhat_box = xhat_box;
  qc.coeff_bits = coeff_bits;
  return qc;
}

PidQuantization ProblemSpec::pid_quantization() const {
  PidQuantization qc;
  qc.xhat_box = pid.xhat_box;
  qc.uhat_box = pid.uhat_box;
  qc.bits = bits;
  qc.coeff_bits = coeff_bits;
  return qc;
}

Vector ProblemSpec::initial_state() const {
  Vector x0 = Vector::Zero(plant.states());
  for (std::size_t i = 0; i < simulation.x0.size(); ++i) {
    x0(static_cast<Eigen::Index>(i)) = simulation.x0[i];
  }
  return x0;
}

ProblemSpec parse_problem(std::string_view json_text) {
  const Json doc = parse_json(json_text);
  if (!doc.is_object()) throw ParseError("problem document must be a JSON object");
  const Reader root(doc, "");
  ProblemSpec s;
  if (root.has("name")) s.name = root.at("name").string();
  if (root.has("mode")) {
    const std::string mode = root.at("mode").string();
    if (mode == "lqg") {
      s.mode = Mode::Lqg;
    } else if (mode == "pid") {
      s.mode = Mode::Pid;
    } else {
      throw ParseError("field 'mode' must be \"lqg\" or \"pid\"");
    }
  }
  if (root.has("plant") == root.has("transfer_function")) {
    throw ParseError("give exactly one of 'plant' and 'transfer_function'");
  }
  if (root.has("plant")) {
    const Reader p = root.at("plant");
    s.plant.a = p.at("A").matrix();
    s.plant.b = p.at("B").matrix();
    s.plant.bbar = p.has("Bbar") ? p.at("Bbar").matrix() : s.plant.b;
    s.plant.c = p.at("C").matrix();
  } else {
    const Reader tf = root.at("transfer_function");
    s.tf_num = tf.at("num").numbers();
    s.tf_den = tf.at("den").numbers();
    s.plant = plant::realize_transfer_function(s.tf_num, s.tf_den);
  }
  s.plant.name = s.name;
  if (root.has("tau")) s.tau = root.at("tau").number();
  if (root.has("bits")) s.bits = static_cast<int>(root.at("bits").integer());
  if (root.has("coeff_bits")) s.coeff_bits = static_cast<int>(root.at("coeff_bits").integer());
  if (root.has("weights")) {
    const auto w = root.at("weights").numbers();
    if (w.size() != 4) throw ParseError("field 'weights' needs four entries");
    s.weights = CostWeights{w[0], w[1], w[2], w[3]};
  }
  if (root.has("Q")) s.q = root.at("Q").matrix();
  if (root.has("R")) s.r = root.at("R").matrix();
  if (root.has("Qhat")) s.qhat = root.at("Qhat").matrix();
  if (root.has("Rhat")) s.rhat = root.at("Rhat").matrix();
  if (root.has("y_box")) s.y_box = root.at("y_box").box();
  if (root.has("xhat_box")) s.xhat_box = root.at("xhat_box").box();
  if (root.has("swarm")) read_swarm(root.at("swarm"), s.swarm);
  if (root.has("pid")) {
    const Reader p = root.at("pid");
    if (p.has("kp")) s.pid.gains.kp = p.at("kp").number();
    if (p.has("ki")) s.pid.gains.ki = p.at("ki").number();
    if (p.has("kd")) s.pid.gains.kd = p.at("kd").number();
    if (p.has("weights")) {
      const auto w = p.at("weights").numbers();
      if (w.size() != 3) throw ParseError("field 'pid.weights' needs three entries");
      s.pid.weights = PidWeights{w[0], w[1], w[2]};
    }
    if (p.has("settling_time")) s.pid.constraints.settling_time = p.at("settling_time").number();
    if (p.has("max_deviation")) s.pid.constraints.max_deviation = p.at("max_deviation").number();
    if (p.has("xhat_box")) s.pid.xhat_box = p.at("xhat_box").box();
    if (p.has("uhat_box")) s.pid.uhat_box = p.at("uhat_box").interval();
  }
  if (root.has("simulation")) {
    const Reader sim = root.at("simulation");
    if (sim.has("x0")) s.simulation.x0 = sim.at("x0").numbers();
    if (sim.has("steps")) s.simulation.steps = sim.at("steps").integer();
  }
  if (root.has("reference_gains")) s.reference_gains = read_gains(root.at("reference_gains"));
  if (root.has("reference_baseline")) s.reference_baseline = read_gains(root.at("reference_baseline"));
  s.validate();
  return s;
}

std::string load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProblemSpec load_problem(const std::string& path) {
  try {
    return parse_problem(load_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string save_problem(const ProblemSpec& s) {
  Json doc;
  doc["name"] = s.name;
  doc["mode"] = std::string(to_string(s.mode));
  if (!s.tf_den.empty()) {
    doc["transfer_function"] = {{"num", s.tf_num}, {"den", s.tf_den}};
  } else {
    doc["plant"] = {{"A", matrix_json(s.plant.a)},
                    {"B", matrix_json(s.plant.b)},
                    {"Bbar", matrix_json(s.plant.bbar)},
                    {"C", matrix_json(s.plant.c)}};
  }
  doc["tau"] = s.tau;
  doc["bits"] = s.bits;
  doc["coeff_bits"] = s.coeff_bits;
  doc["weights"] = {s.weights.w1, s.weights.w2, s.weights.w3, s.weights.w4};
  if (s.q.size() != 0) doc["Q"] = matrix_json(s.q);
  if (s.r.size() != 0) doc["R"] = matrix_json(s.r);
  if (s.qhat.size() != 0) doc["Qhat"] = matrix_json(s.qhat);
  if (s.rhat.size() != 0) doc["Rhat"] = matrix_json(s.rhat);
  if (!s.y_box.empty()) doc["y_box"] = box_json(s.y_box);
  if (!s.xhat_box.empty()) doc["xhat_box"] = box_json(s.xhat_box);
  const SwarmConfig& w = s.swarm;
  doc["swarm"] = {{"particles", w.particles},
                  {"max_iterations", w.max_iterations},
                  {"c1", w.c1},
                  {"c2", w.c2},
                  {"w_max", w.w_max},
                  {"y_min", w.y_min},
                  {"y_max", w.y_max},
                  {"v_max", w.v_max},
                  {"stall_window", w.stall_window},
                  {"stall_tolerance", w.stall_tolerance},
                  {"seed", w.seed},
                  {"per_dimension_random", w.per_dimension_random}};
  doc["pid"] = {{"kp", s.pid.gains.kp},
                {"ki", s.pid.gains.ki},
                {"kd", s.pid.gains.kd},
                {"weights", {s.pid.weights.w1, s.pid.weights.w2, s.pid.weights.w3}},
                {"settling_time", s.pid.constraints.settling_time},
                {"max_deviation", s.pid.constraints.max_deviation},
                {"xhat_box", box_json(s.pid.xhat_box)},
                {"uhat_box", {s.pid.uhat_box.lo, s.pid.uhat_box.hi}}};
  doc["simulation"] = {{"x0", s.simulation.x0}, {"steps", s.simulation.steps}};
  if (s.reference_gains) doc["reference_gains"] = gains_json(*s.reference_gains);
  if (s.reference_baseline) doc["reference_baseline"] = gains_json(*s.reference_baseline);
  return doc.dump(2) + "\n";
}

GainPair parse_gains(std::string_view json_text) {
  const Json doc = parse_json(json_text);
  if (!doc.is_object()) throw ParseError("gains document must be a JSON object");
  return read_gains(Reader(doc, ""));
}

PidGains parse_pid_gains(std::string_view json_text) {
  const Json doc = parse_json(json_text);
  if (!doc.is_object()) throw ParseError("gains document must be a JSON object");
  const Reader r(doc, "");
  return PidGains{r.at("kp").number(), r.at("ki").number(), r.at("kd").number()};
}

std::pair<std::vector<TauCandidate>, std::size_t> calibrate_tau(
    const ProblemSpec& spec, double s_target, double p_target,
    const std::vector<double>& taus) {
  std::vector<TauCandidate> out;
  std::size_t best = 0;
  for (double tau : taus) {
    try {
      const DiscretePlant dp = plant::discretize(spec.plant, tau);
      const CostMatrices w = spec.cost_matrices(dp);
      const GainPair g = analysis::optimal_gains(dp, w);
      TauCandidate c;
      c.tau = tau;
      c.s_norm = analysis::lqr_cost_norm(dp, g.k, w.q, w.r);
      c.p_norm = analysis::lqg_cost_norm(dp, g.l, w.qhat, w.rhat);
      c.rel_error = std::max(std::fabs(c.s_norm / s_target - 1.0),
                             std::fabs(c.p_norm / p_target - 1.0));
      if (out.empty() || c.rel_error < out[best].rel_error) best = out.size();
      out.push_back(c);
    } catch (const Error&) {
      continue;
    }
  }
  if (out.empty()) throw NoSolutionError("no tau in the sweep admits a baseline");
  return {out, best};
}

}  // namespace fxsynth
