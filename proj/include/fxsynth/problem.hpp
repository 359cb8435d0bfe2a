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

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fxsynth/analysis.hpp"
#include "fxsynth/plant.hpp"
#include "fxsynth/pso.hpp"

namespace fxsynth {

enum class Mode { Lqg, Pid };

std::string_view to_string(Mode mode);

struct PidSpec {
  PidGains gains;  // starting point of the search, or the gains to analyze
  PidWeights weights;
  PidConstraints constraints;
  std::vector<Interval> xhat_box{Interval{-1, 1}, Interval{-1, 1}};
  Interval uhat_box{-1, 1};
};

struct SimulationSpec {
  std::vector<double> x0;  // empty: zero initial state
  long steps = 1000;
};

struct ProblemSpec {
  std::string name = "problem";
  Mode mode = Mode::Lqg;
  ContinuousPlant plant;
  // Transfer-function source of `plant`, if it was given that way.
  std::vector<double> tf_num;
  std::vector<double> tf_den;
  double tau = 0.01;
  int bits = 16;
  int coeff_bits = 0;
  CostWeights weights;
  // Empty matrices mean identity.
  Matrix q, r, qhat, rhat;
  std::vector<Interval> y_box;     // empty: [-1, 1] per output
  std::vector<Interval> xhat_box;  // empty: [-1, 1] per state
  SwarmConfig swarm;
  PidSpec pid;
  SimulationSpec simulation;
  // Gains published for this system, if any.
  std::optional<GainPair> reference_gains;
  std::optional<GainPair> reference_baseline;

  // Throws DimensionError/ConfigError.
  void validate() const;
  DiscretePlant discrete() const;
  CostMatrices cost_matrices(const DiscretePlant& dp) const;
  QuantizationConfig quantization(const DiscretePlant& dp) const;
  PidQuantization pid_quantization() const;
  Vector initial_state() const;
};

// Parses and validates; ParseError names the offending field or position.
ProblemSpec parse_problem(std::string_view json_text);
ProblemSpec load_problem(const std::string& path);
// Every field written explicitly, so parse_problem(save_problem(s)) == s.
std::string save_problem(const ProblemSpec& spec);

// Gains documents: {"K": [[...]], "L": [[...]]}, or {"kp", "ki", "kd"}.
GainPair parse_gains(std::string_view json_text);
PidGains parse_pid_gains(std::string_view json_text);
std::string load_text(const std::string& path);

// Benchmark systems -----------------------------------------------------------

std::vector<std::string> preset_names();
// Throws ConfigError for unknown names.
ProblemSpec preset(std::string_view name);

// Published metrics for the LQR/LQG gains and the synthesized gains.
struct PublishedTargets {
  double s_baseline = 0, s_synth = 0;
  double p_baseline = 0, p_synth = 0;
  double gamma1y_baseline = 0, gamma1y_synth = 0;
  double radius_baseline = 0, radius_synth = 0;  // gamma2y * b(e2)
};
std::optional<PublishedTargets> published_targets(std::string_view name);

struct TauCandidate {
  double tau = 0;
  double s_norm = 0;
  double p_norm = 0;
  double rel_error = 0;  // max of the two relative errors
};

inline const std::vector<double> kTauSweep{0.1, 0.05, 0.02, 0.01, 0.005, 0.001};

// Baseline LQR/LQG norms for each tau; candidates whose DARE fails are
// skipped. Returns the candidates and the index of the best one.
std::pair<std::vector<TauCandidate>, std::size_t> calibrate_tau(
    const ProblemSpec& spec, double s_target, double p_target,
    const std::vector<double>& taus = kTauSweep);

}  // namespace fxsynth
