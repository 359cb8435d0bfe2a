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
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

#include "fxsynth/linalg.hpp"
#include "fxsynth/plant.hpp"

namespace fxsynth {

struct SwarmConfig {
  int particles = 24;
  int max_iterations = 100;
  double c1 = 0.5;
  double c2 = 1.0;
  double w_max = 1.0;
  double y_min = -150;
  double y_max = 150;
  // Velocity limit; <= 0 means y_max - y_min.
  double v_max = 0;
  int stall_window = 50;
  double stall_tolerance = 1e-6;
  std::uint64_t seed = 1;
  // Draw r1, r2 per dimension instead of per particle.
  bool per_dimension_random = false;
  // Concurrent cost evaluations; 0 means FXSYNTH_THREADS or the core count.
  int threads = 0;

  // (c1 + c2) / 2 - 1.
  double w_min() const { return (c1 + c2) / 2.0 - 1.0; }
  double velocity_limit() const { return v_max > 0 ? v_max : y_max - y_min; }
  void validate() const;
};

struct Particle {
  Vector position;
  Vector velocity;
  double cost = 0;
  Vector best_position;
  double best_cost = 0;
};

struct SwarmState {
  int iteration = 0;
  std::vector<Particle> particles;
  Vector global_best;
  double global_best_cost = 0;
  std::vector<double> best_history;
  std::vector<double> mean_history;    // mean over finite costs
  std::vector<int> infinite_history;   // particles with infinite cost
  int stall_count = 0;
  std::mt19937_64 rng;
};

// Evaluations that throw or return NaN count as +inf.
using CostFunction = std::function<double(const Vector&)>;

namespace pso {

double inertia_weight(int iteration, const SwarmConfig& config);

// Uniform in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);

// All particles start at `start`; velocities are uniform in the velocity box.
// Initialization is iteration 1.
SwarmState initialize(const SwarmConfig& config, const Vector& start,
                      const CostFunction& cost);

// One velocity/position update and evaluation of every particle.
void step(SwarmState& state, const SwarmConfig& config,
          const CostFunction& cost);

// True once the global best has stayed within the stall tolerance for the
// stall window.
bool stalled(const SwarmState& state, const SwarmConfig& config);

struct Result {
  Vector best;
  double best_cost = 0;
  int iterations = 0;
  bool stalled = false;
  std::vector<double> best_history;
  std::vector<double> mean_history;
  std::vector<int> infinite_history;
};

// Throws NoSolutionError if no finite cost was ever seen.
Result run(const SwarmConfig& config, const Vector& start,
           const CostFunction& cost);

// K entries then L entries, row-major.
Vector flatten(const GainPair& gains);
GainPair unflatten(const Vector& v, Eigen::Index n, Eigen::Index m,
                   Eigen::Index p);

// iteration,best_cost,mean_cost
void write_history_csv(std::ostream& os, const Result& result);

int worker_count(const SwarmConfig& config);

}  // namespace pso
}  // namespace fxsynth
