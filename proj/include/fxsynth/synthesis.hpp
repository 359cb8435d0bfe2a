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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fxsynth/analysis.hpp"
#include "fxsynth/fxprogram.hpp"
#include "fxsynth/problem.hpp"
#include "fxsynth/pso.hpp"

namespace fxsynth {

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> bits;
  std::optional<double> tau;
  // Skip the search and analyze these gains (or the problem's PID gains).
  bool analyze_only = false;
  std::optional<GainPair> gains;
  std::optional<PidGains> pid_gains;
};

struct RunReport {
  std::string name;
  Mode mode = Mode::Lqg;
  double tau = 0;
  int bits = 0;
  int coeff_bits = 0;
  std::uint64_t seed = 0;
  bool searched = false;

  // Observer mode.
  Baseline baseline;
  double baseline_cost = 0;
  GainPair gains;
  AnalysisReport metrics;
  // baseline gamma2y*b(e2) / synthesized gamma2y*b(e2).
  double improvement = 0;

  // PID mode.
  PidGains start_pid;
  PidReport start_pid_report;
  PidGains pid_gains;
  PidReport pid;

  std::optional<pso::Result> search;
  FxProgram program;
  Trajectory trajectory;
  double steady_state_peak = 0;
  std::string c_source;
};

// Applies option overrides and validates.
ProblemSpec apply_options(ProblemSpec spec, const RunOptions& options);

// Baseline, search (unless analyze_only), metrics, program, C source and a
// quantized simulation from the problem's initial state. Throws NoSolutionError
// when the baseline does not stabilize.
RunReport run_synthesis(const ProblemSpec& spec, const RunOptions& options = {});

// Metrics of given gains at the problem's settings (no search, no baseline).
AnalysisReport analyze_gains(const ProblemSpec& spec, const GainPair& gains);

// JSON with scalars rounded to 15 significant digits and "inf" for infinity.
std::string report_to_json(const RunReport& report);
std::string analysis_to_json(const AnalysisReport& report);

// report.json, controller.c, program.json, trajectory.csv and, after a
// search, pso_history.csv. Returns the file names written.
std::vector<std::string> write_artifacts(const RunReport& report,
                                         const std::string& dir);

}  // namespace fxsynth
