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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fxsynth/error.hpp"
#include "fxsynth/synthesis.hpp"
#include "json.hpp"

namespace fxsynth {

namespace {

using Json = nlohmann::ordered_json;

Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return std::strtod(buf, nullptr);
}

Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Json matrix(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

Json metrics_json(const AnalysisReport& r) {
  Json j;
  j["stable"] = r.stable;
  j["S_norm"] = num(r.s_norm);
  j["P_norm"] = num(r.p_norm);
  j["gamma1y"] = num(r.gamma1y);
  j["gamma2y"] = num(r.gamma2y);
  j["b_e2"] = num(r.b_e2);
  j["radius_coeffs"] = Json::array({num(r.radius_e1()), num(r.radius_const())});
  j["output_bounds"] = nums(r.output_bounds);
  j["bounds_exact"] = r.bounds_exact;
  j["cost"] = num(r.cost);
  return j;
}

Json pid_json(const PidGains& g, const PidReport& r) {
  Json j;
  j["kp"] = num(g.kp);
  j["ki"] = num(g.ki);
  j["kd"] = num(g.kd);
  j["stable"] = r.stable;
  j["spectral_radius"] = num(r.spectral_radius);
  j["phase_margin_deg"] = num(r.margins.phase_margin_deg);
  j["gain_margin"] = num(r.margins.gain_margin);
  j["gamma"] = num(r.gamma);
  j["b_eq1"] = num(r.b_eq1);
  j["b_eq2"] = num(r.b_eq2);
  j["quantization_term"] = num(r.quantization_term());
  j["settling_time"] = num(r.settling_time);
  j["peak_deviation"] = num(r.peak_deviation);
  j["meets_constraints"] = r.meets_constraints;
  j["cost"] = num(r.cost);
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::vector<std::string> artifact_names(const RunReport& r) {
  std::vector<std::string> names{"report.json"};
  if (!r.program.nodes.empty()) {
    names.insert(names.end(), {"controller.c", "program.json", "trajectory.csv"});
  }
  if (r.search) names.push_back("pso_history.csv");
  return names;
}

}  // namespace

std::string analysis_to_json(const AnalysisReport& report) {
  return metrics_json(report).dump(2) + "\n";
}

std::string report_to_json(const RunReport& r) {
  Json j;
  j["name"] = r.name;
  j["mode"] = std::string(to_string(r.mode));
  j["tau"] = num(r.tau);
  j["bits"] = r.bits;
  j["coeff_bits"] = r.coeff_bits;
  j["seed"] = r.seed;
  j["searched"] = r.searched;
  if (r.mode == Mode::Lqg) {
    Json base = metrics_json(r.baseline.report);
    base["cost"] = num(r.baseline_cost);
    base["K"] = matrix(r.baseline.gains.k);
    base["L"] = matrix(r.baseline.gains.l);
    j["baseline"] = base;
    Json syn = metrics_json(r.metrics);
    syn["K"] = matrix(r.gains.k);
    syn["L"] = matrix(r.gains.l);
    j["synthesized"] = syn;
    j["improvement"] = num(r.improvement);
  } else {
    j["start"] = pid_json(r.start_pid, r.start_pid_report);
    j["synthesized"] = pid_json(r.pid_gains, r.pid);
  }
  if (r.search) {
    j["search"] = {{"iterations", r.search->iterations},
                   {"stalled", r.search->stalled},
                   {"best_cost", num(r.search->best_cost)},
                   {"final_mean_cost", num(r.search->mean_history.back())},
                   {"final_infinite_count", r.search->infinite_history.back()}};
  }
  if (!r.program.nodes.empty()) {
    Json sim;
    sim["samples"] = r.trajectory.samples.size();
    sim["fault_step"] = r.trajectory.fault_step ? Json(*r.trajectory.fault_step) : Json(nullptr);
    sim["fault_node"] = r.trajectory.fault_node;
    sim["steady_state_peak"] = num(r.steady_state_peak);
    j["simulation"] = sim;
  }
  j["artifacts"] = artifact_names(r);
  return j.dump(2) + "\n";
}

std::vector<std::string> write_artifacts(const RunReport& r, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  write_file(root / "report.json", report_to_json(r));
  if (!r.program.nodes.empty()) {
    write_file(root / "controller.c", r.c_source);
    write_file(root / "program.json", program_to_json(r.program));
    std::ostringstream traj;
    plant::write_trajectory_csv(traj, r.trajectory);
    write_file(root / "trajectory.csv", traj.str());
  }
  if (r.search) {
    std::ostringstream hist;
    pso::write_history_csv(hist, *r.search);
    write_file(root / "pso_history.csv", hist.str());
  }
  return artifact_names(r);
}

}  // namespace fxsynth
