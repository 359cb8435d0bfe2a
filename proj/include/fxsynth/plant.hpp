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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fxsynth/linalg.hpp"

namespace fxsynth {

struct FxProgram;

struct ContinuousPlant {
  Matrix a;     // n x n
  Matrix b;     // n x m
  Matrix bbar;  // n x q
  Matrix c;     // p x n
  std::string name;

  Eigen::Index states() const { return a.rows(); }
  Eigen::Index inputs() const { return b.cols(); }
  Eigen::Index outputs() const { return c.rows(); }
  Eigen::Index disturbances() const { return bbar.cols(); }

  // Throws DimensionError on inconsistent shapes.
  void validate() const;
};

struct DiscretePlant {
  Matrix a;
  Matrix b;
  Matrix bbar;
  Matrix c;
  double tau = 0;

  Eigen::Index states() const { return a.rows(); }
  Eigen::Index inputs() const { return b.cols(); }
  Eigen::Index outputs() const { return c.rows(); }
  Eigen::Index disturbances() const { return bbar.cols(); }

  void validate() const;
};

struct GainPair {
  Matrix k;  // m x n
  Matrix l;  // n x p
};

struct ClosedLoop {
  Matrix g;      // 2n x 2n
  Matrix h1;     // 2n x (q + p)
  Matrix h2;     // 2n x (n + m)
  Matrix c_out;  // p x 2n
};

struct PidGains {
  double kp = 0;
  double ki = 0;
  double kd = 0;
};

struct PidRealization {
  Matrix a;  // 2 x 2
  Matrix b;  // 2 x 1
  Matrix c;  // 1 x 2
  Matrix d;  // 1 x 1
};

// Closed loop of a SISO plant with the discrete PID of pid_realization.
// State is [x; x_hat]; h injects [e_q1; e_q2].
struct PidClosedLoop {
  Matrix m;
  Matrix h;
  Matrix c_out;
};

struct Sample {
  long step = 0;
  Vector x;
  Vector xhat;
  Vector y;
  Vector u;
};

struct Trajectory {
  std::vector<Sample> samples;
  // Set when a quantized run stopped on an overflow.
  std::optional<long> fault_step;
  std::string fault_node;
};

namespace plant {

DiscretePlant discretize(const ContinuousPlant& plant, double tau);

void check_gains(const DiscretePlant& dp, const GainPair& gains);

ClosedLoop assemble_closed_loop(const DiscretePlant& dp,
                                const GainPair& gains);

PidRealization pid_realization(const PidGains& gains, double tau);

PidClosedLoop assemble_pid_closed_loop(const DiscretePlant& dp,
                                       const PidRealization& pid);

// Controllable canonical form of num(s)/den(s), coefficients in descending
// powers. Requires deg num < deg den.
ContinuousPlant realize_transfer_function(const std::vector<double>& num,
                                          const std::vector<double>& den);

// Per-step disturbance d and measurement noise v; missing entries mean zero.
struct Disturbances {
  std::vector<Vector> d;
  std::vector<Vector> v;
};

// Deterministic zero-mean Gaussian sequences.
Disturbances gaussian_disturbances(const DiscretePlant& dp, long steps,
                                   double d_sigma, double v_sigma,
                                   unsigned long long seed);

// Iterates the observer-based loop in real arithmetic.
Trajectory simulate_ideal(const DiscretePlant& dp, const GainPair& gains,
                          const Vector& x0, long steps,
                          const Disturbances& noise = {},
                          const Vector* xhat0 = nullptr);

// Runs the observer update and feedback law through `program` bit-exactly
// (eval_fx) while the plant evolves in real arithmetic. An overflow halts the
// run and is recorded in fault_step/fault_node.
Trajectory simulate_quantized(const DiscretePlant& dp, const FxProgram& program,
                              const Vector& x0, long steps,
                              const Disturbances& noise = {});

// Same for a PID program (inputs x_hat, u_hat = -y; outputs x_hat', y_hat).
Trajectory simulate_pid_quantized(const DiscretePlant& dp,
                                  const FxProgram& program, const Vector& x0,
                                  long steps, const Disturbances& noise = {});

// max ||y[r]|| over the last `fraction` of the samples.
double steady_state_peak(const Trajectory& traj, double fraction = 0.2);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace plant
}  // namespace fxsynth
