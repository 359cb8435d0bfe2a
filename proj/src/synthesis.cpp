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

#include "fxsynth/synthesis.hpp"

#include <cmath>

#include "fxsynth/emit_c.hpp"
#include "fxsynth/error.hpp"

namespace fxsynth {

namespace {

Vector pid_vector(const PidGains& g) {
  Vector v(3);
  v << g.kp, g.ki, g.kd;
  return v;
}

void run_lqg(const ProblemSpec& spec, const RunOptions& options, RunReport& rep) {
  const DiscretePlant dp = spec.discrete();
  const CostMatrices w = spec.cost_matrices(dp);
  const QuantizationConfig qc = spec.quantization(dp);
  rep.baseline = analysis::compute_baseline(dp, w, qc);
  rep.baseline_cost = analysis::weighted_cost(rep.baseline.report, spec.weights, rep.baseline);
  if (options.analyze_only) {
    rep.gains = options.gains ? *options.gains
                : spec.reference_gains ? *spec.reference_gains
                                       : rep.baseline.gains;
  } else {
    const Eigen::Index n = dp.states(), m = dp.inputs(), p = dp.outputs();
    const CostFunction cost = [&](const Vector& x) {
      return analysis::total_cost(dp, pso::unflatten(x, n, m, p), spec.weights,
                                  rep.baseline, w, qc)
          .cost;
    };
    rep.search = pso::run(spec.swarm, pso::flatten(rep.baseline.gains), cost);
    rep.searched = true;
    rep.gains = pso::unflatten(rep.search->best, n, m, p);
  }
  rep.metrics = analysis::total_cost(dp, rep.gains, spec.weights, rep.baseline, w, qc);
  if (rep.metrics.stable && rep.metrics.radius_const() > 0) {
    rep.improvement = rep.baseline.report.radius_const() / rep.metrics.radius_const();
  }
  if (!rep.metrics.stable) return;
  rep.program = synthesize_controller_program(dp, rep.gains, qc.y_box, qc.xhat_box,
                                              qc.bits, qc.coeff_bits);
  rep.trajectory = plant::simulate_quantized(dp, rep.program, spec.initial_state(),
                                             spec.simulation.steps);
}

void run_pid(const ProblemSpec& spec, const RunOptions& options, RunReport& rep) {
  const PidQuantization qc = spec.pid_quantization();
  rep.start_pid = options.pid_gains ? *options.pid_gains : spec.pid.gains;
  rep.start_pid_report = analysis::pid_evaluate(spec.plant, spec.tau, rep.start_pid,
                                                spec.pid.weights, spec.pid.constraints, qc);
  if (options.analyze_only) {
    rep.pid_gains = rep.start_pid;
  } else {
    const CostFunction cost = [&](const Vector& x) {
      return analysis::pid_cost(spec.plant, spec.tau, PidGains{x(0), x(1), x(2)},
                                spec.pid.weights, spec.pid.constraints, qc);
    };
    rep.search = pso::run(spec.swarm, pid_vector(rep.start_pid), cost);
    rep.searched = true;
    rep.pid_gains = PidGains{rep.search->best(0), rep.search->best(1), rep.search->best(2)};
  }
  rep.pid = analysis::pid_evaluate(spec.plant, spec.tau, rep.pid_gains, spec.pid.weights,
                                   spec.pid.constraints, qc);
  if (!rep.pid.stable) return;
  const DiscretePlant dp = spec.discrete();
  rep.program = synthesize_pid_program(plant::pid_realization(rep.pid_gains, spec.tau),
                                       qc.xhat_box, qc.uhat_box, qc.bits, qc.coeff_bits);
  rep.trajectory = plant::simulate_pid_quantized(dp, rep.program, spec.initial_state(),
                                                 spec.simulation.steps);
}

}  // namespace

ProblemSpec apply_options(ProblemSpec spec, const RunOptions& options) {
  if (options.seed) spec.swarm.seed = *options.seed;
  if (options.bits) spec.bits = *options.bits;
  if (options.tau) spec.tau = *options.tau;
  spec.validate();
  return spec;
}

RunReport run_synthesis(const ProblemSpec& input, const RunOptions& options) {
  const ProblemSpec spec = apply_options(input, options);
  RunReport rep;
  rep.name = spec.name;
  rep.mode = spec.mode;
  rep.tau = spec.tau;
  rep.bits = spec.bits;
  rep.coeff_bits = spec.coeff_bits;
  rep.seed = spec.swarm.seed;
  if (spec.mode == Mode::Lqg) {
    run_lqg(spec, options, rep);
  } else {
    run_pid(spec, options, rep);
  }
  if (!rep.program.nodes.empty()) {
    rep.steady_state_peak = plant::steady_state_peak(rep.trajectory);
    rep.c_source = emit_c_source(rep.program, "controller");
  }
  return rep;
}

AnalysisReport analyze_gains(const ProblemSpec& spec, const GainPair& gains) {
  spec.validate();
  const DiscretePlant dp = spec.discrete();
  return analysis::evaluate(dp, gains, spec.cost_matrices(dp), spec.quantization(dp));
}

}  // namespace fxsynth
