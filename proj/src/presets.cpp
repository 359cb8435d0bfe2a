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

#include "fxsynth/error.hpp"
#include "fxsynth/problem.hpp"

namespace fxsynth {

namespace {

using linalg::from_rows;

// Cart-pendulum constants shared by the two pendulum systems.
constexpr double kG = 9.8;
constexpr double kRod = 0.3;
constexpr double kMass = 0.2;
constexpr double kCart = 0.5;
constexpr double kFriction = 0.1;
constexpr double kInertia = 0.006;

ProblemSpec bicycle() {
  const double g = 9.8, h = 1.5, v0 = 2.0, a = 0.5, b = 1.0;
  ProblemSpec s;
  s.name = "bicycle";
  s.plant.a = from_rows({{0, g / h}, {1, 0}});
  s.plant.b = from_rows({{1}, {0}});
  s.plant.bbar = s.plant.b;
  s.plant.c = from_rows({{a * v0 / (b * h), v0 * v0 / (b * h)}});
  s.tau = 0.01;
  s.bits = 16;
  s.simulation = {{0.2, 0.2}, 1000};
  s.reference_gains = GainPair{from_rows({{3.0253, 12.6089}}),
                               from_rows({{0.0132}, {0.1021}})};
  s.reference_baseline = GainPair{from_rows({{5.1538, 12.9724}}),
                                  from_rows({{0.0317}, {0.0118}})};
  return s;
}

ProblemSpec dc_motor() {
  const double b = 3.508e-6, j = 3.228e-6, k = 0.027, r = 4, l = 2.75e-6;
  ProblemSpec s;
  s.name = "dc_motor";
  s.plant.a = from_rows({{0, 1, 0}, {0, -b / j, k / j}, {0, -k / l, -r / l}});
  s.plant.b = from_rows({{0}, {0}, {1 / l}});
  s.plant.bbar = s.plant.b;
  s.plant.c = from_rows({{1, 0, 0}});
  s.tau = 0.001;
  s.bits = 16;
  s.simulation = {{0.1, 0.1, 0.1}, 5000};
  s.reference_gains = GainPair{from_rows({{0.1129, 0.0211, 0.0093}}),
                               from_rows({{0.0390}, {0.3700}, {-0.0175}})};
  s.reference_baseline = GainPair{from_rows({{0.4055, 0.3782, 0.0022}}),
                                  from_rows({{0.0288}, {0.3858}, {-0.0026}})};
  return s;
}

ProblemSpec pitch() {
  ProblemSpec s;
  s.name = "pitch";
  s.plant.a = from_rows({{-0.313, 56.7, 0}, {-0.0139, -0.426, 0}, {0, 56.7, 0}});
  s.plant.b = from_rows({{0.232}, {0.0203}, {0}});
  s.plant.bbar = s.plant.b;
  s.plant.c = from_rows({{0, 0, 1}});
  s.tau = 0.001;
  s.bits = 32;
  s.simulation = {{0.1, 0.1, 0.1}, 5000};
  s.reference_gains = GainPair{from_rows({{-0.1202, 42.5655, 1.0001}}),
                               from_rows({{0.0001}, {0}, {0.0017}})};
  s.reference_baseline = GainPair{from_rows({{-0.1141, 49.1428, 0.9995}}),
                                  from_rows({{0.6407e-3}, {0.0039e-3}, {0.6655e-3}})};
  return s;
}

ProblemSpec inverted_pendulum() {
  const double ml = kMass * kRod;
  const double i_ml2 = kInertia + kMass * kRod * kRod;
  const double p = kInertia * (kCart + kMass) + kCart * kMass * kRod * kRod;
  ProblemSpec s;
  s.name = "inverted_pendulum";
  s.plant.a = from_rows({{0, 1, 0, 0},
                         {0, -i_ml2 * kFriction / p, kMass * kMass * kG * kRod * kRod / p, 0},
                         {0, 0, 0, 1},
                         {0, -ml * kFriction / p, ml * kG * (kCart + kMass) / p, 0}});
  s.plant.b = from_rows({{0}, {i_ml2 / p}, {0}, {ml / p}});
  s.plant.bbar = from_rows({{1}, {1}, {1}, {1}});
  s.plant.c = from_rows({{1, 0, 0, 0}, {0, 0, 1, 0}});
  s.tau = 0.001;
  s.bits = 32;
  s.simulation = {{0.1, 0.1, 0.1, 0.1}, 5000};
  s.reference_gains = GainPair{
      from_rows({{-1.5362, -2.0254, 16.5192, 2.7358}}),
      from_rows({{0.0017, 0.0001}, {0.0021, 0.0018}, {0.0012, 0.0122}, {0, 0.0770}})};
  s.reference_baseline = GainPair{
      from_rows({{-0.9929, -2.0276, 20.2819, 3.9126}}),
      from_rows({{0.0016, 0.0007}, {0.0011, 0.0051}, {0.0007, 0.0111}, {0.0034, 0.0618}})};
  return s;
}

ProblemSpec batch_reactor() {
  ProblemSpec s;
  s.name = "batch_reactor";
  s.plant.a = from_rows({{1.38, -0.2077, 6.715, -5.676},
                         {-0.5814, -4.29, 0, 0.675},
                         {1.067, 4.273, -6.654, 5.893},
                         {0.048, 4.273, 1.343, -2.104}});
  s.plant.b = from_rows({{0, 0}, {5.679, 0}, {1.136, -3.146}, {1.136, 0}});
  s.plant.bbar = from_rows({{1}, {1}, {1}, {1}});
  s.plant.c = from_rows({{1, 0, 1, -1}, {0, 1, 0, 0}});
  s.tau = 0.01;
  s.bits = 16;
  s.weights = CostWeights{1, 2, 1, 5};
  s.simulation = {{0.1, 0.1, 0.1, 0.1}, 1000};
  s.reference_gains = GainPair{
      from_rows({{0.0583, 0.9093, 0.3258, 0.8721}, {-2.4638, -0.0504, -1.7099, 1.1653}}),
      from_rows({{0.0774, -0.0103}, {-0.0022, 0.0227}, {0.0267, 0.0398}, {0.0356, 0.0001}})};
  s.reference_baseline = GainPair{
      from_rows({{0.0376, 0.9157, 0.3262, 0.8226}, {-2.4884, -0.0734, -1.7461, 1.1438}}),
      from_rows({{0.0447, 0}, {-0.0003, 0.0020}, {0.0170, 0.0058}, {0.0127, 0.0059}})};
  return s;
}

// The published three-state realization of the pendulum transfer function.
// Its exact controllable form carries a cancelled zero at s = 0, which the
// printed realization does not.
ProblemSpec pid_pendulum() {
  ProblemSpec s;
  s.name = "pid_pendulum";
  s.mode = Mode::Pid;
  s.plant.a = from_rows({{-0.1818, 3.8977, 0.5568}, {8.0, 0, 0}, {0, 1, 0}});
  s.plant.b = from_rows({{1}, {0}, {0}});
  s.plant.bbar = s.plant.b;
  s.plant.c = from_rows({{0, 0.5682, 1}});
  s.tau = 0.01;
  s.bits = 32;
  s.pid.gains = PidGains{109.032, 1.2268, 13.9945};
  s.simulation = {{0, 0, 0.05}, 2000};
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"bicycle", "dc_motor", "pitch", "inverted_pendulum", "batch_reactor",
          "pid_pendulum"};
}

ProblemSpec preset(std::string_view name) {
  ProblemSpec s;
  if (name == "bicycle") {
    s = bicycle();
  } else if (name == "dc_motor") {
    s = dc_motor();
  } else if (name == "pitch") {
    s = pitch();
  } else if (name == "inverted_pendulum") {
    s = inverted_pendulum();
  } else if (name == "batch_reactor") {
    s = batch_reactor();
  } else if (name == "pid_pendulum") {
    s = pid_pendulum();
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  s.plant.name = s.name;
  s.validate();
  return s;
}

std::optional<PublishedTargets> published_targets(std::string_view name) {
  if (name == "bicycle") return PublishedTargets{3956.3, 4331.7, 0.0229, 0.0246, 5.0489, 2.5341, 0.5486, 0.0513};
  if (name == "dc_motor") return PublishedTargets{1001.6, 1376.7, 36.6315, 36.6731, 30.566, 15.421, 0.16, 0.011};
  if (name == "pitch") return PublishedTargets{2.9732e6, 2.9887e6, 0.0013, 0.0018, 2.6781, 1.4453, 0.4746, 0.0807};
  if (name == "inverted_pendulum") return PublishedTargets{4.2988e4, 5.3471e4, 0.3600, 0.3897, 83.4217, 30.3801, 0.0432, 0.0086};
  if (name == "batch_reactor") return PublishedTargets{223.1773, 223.1825, 0.0731, 0.0949, 2.9309, 2.1216, 0.4194, 0.1642};
  return std::nullopt;
}

}  // namespace fxsynth
