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

#include <limits>
#include <vector>

#include "fxsynth/errbound.hpp"
#include "fxsynth/fxformat.hpp"
#include "fxsynth/linalg.hpp"
#include "fxsynth/lp.hpp"
#include "fxsynth/plant.hpp"

namespace fxsynth {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct CostWeights {
  double w1 = 1;
  double w2 = 1;
  double w3 = 1;
  double w4 = 5;

  // Throws ConfigError unless all are finite, nonnegative and one is positive.
  void validate() const;
  double sum() const { return w1 + w2 + w3 + w4; }
};

struct CostMatrices {
  Matrix q;     // n x n
  Matrix r;     // m x m
  Matrix qhat;  // q x q (disturbance)
  Matrix rhat;  // p x p (measurement noise)

  static CostMatrices identity(const DiscretePlant& dp);
  void validate(const DiscretePlant& dp) const;
};

// What the fixed-point stage needs to turn gains into b(e2).
struct QuantizationConfig {
  std::vector<Interval> y_box;
  std::vector<Interval> xhat_box;
  int bits = 16;
  int coeff_bits = 0;  // 0: same as bits
  MilpOptions milp;

  static QuantizationConfig unit_boxes(const DiscretePlant& dp, int bits);
};

enum class GainInput { H1, H2 };

namespace analysis {

// Spectral radius below 1 - 1e-9.
bool is_hurwitz(const Matrix& m);

inline constexpr int kL2Grid = 1024;

// max over theta of ||C_out (e^{i theta} I - G)^{-1} H||, scanning [0, pi]
// (conjugate symmetry) on `grid` points and refining the best local maxima
// by golden-section search. Throws Error if G is not Hurwitz.
double l2_gain(const Matrix& g, const Matrix& h, const Matrix& c_out,
               int grid = kL2Grid);
// Output gain gamma_{jy} of the observer loop.
double l2_gain(const ClosedLoop& cl, GainInput which, int grid = kL2Grid);

// S(K) solving the LQR Lyapunov equation; throws Error unless A - BK Hurwitz.
Matrix lqr_cost_matrix(const DiscretePlant& dp, const Matrix& k,
                       const Matrix& q, const Matrix& r);
double lqr_cost_norm(const DiscretePlant& dp, const Matrix& k, const Matrix& q,
                     const Matrix& r);

// P(L) solving the LQG Lyapunov equation; throws Error unless A - LC Hurwitz.
Matrix lqg_cost_matrix(const DiscretePlant& dp, const Matrix& l,
                       const Matrix& qhat, const Matrix& rhat);
double lqg_cost_norm(const DiscretePlant& dp, const Matrix& l,
                     const Matrix& qhat, const Matrix& rhat);

// LQR gain by the DARE and LQG (Kalman predictor) gain by its dual.
GainPair optimal_gains(const DiscretePlant& dp, const CostMatrices& w);

}  // namespace analysis

struct AnalysisReport {
  bool stable = false;
  double s_norm = 0;
  double p_norm = 0;
  double gamma1y = 0;
  double gamma2y = 0;
  double b_e2 = 0;
  // Certified per-output bounds: n observer components then m controls.
  std::vector<double> output_bounds;
  bool bounds_exact = true;
  double cost = kInfinity;

  // Radius gamma1y * b(e1) + gamma2y * b(e2), as (gamma1y, gamma2y * b(e2)).
  double radius_e1() const { return gamma1y; }
  double radius_const() const { return gamma2y * b_e2; }
};

struct Baseline {
  GainPair gains;
  double s_norm = 0;
  double p_norm = 0;
  double gamma1y = 0;
  double gamma2y = 0;
  double b_e2 = 0;
  AnalysisReport report;
};

namespace analysis {

// All metrics for one gain pair; the cost field is left at +inf. Unstable
// loops return stable = false with the remaining fields zero.
AnalysisReport evaluate(const DiscretePlant& dp, const GainPair& gains,
                        const CostMatrices& w, const QuantizationConfig& qc);

// Optimal gains and their metrics. Throws NoSolutionError if the baseline
// does not stabilize or any normalizer is zero.
Baseline compute_baseline(const DiscretePlant& dp, const CostMatrices& w,
                          const QuantizationConfig& qc);

// Fills report.cost with the weighted, baseline-normalized cost (+inf when
// unstable).
double weighted_cost(const AnalysisReport& report, const CostWeights& weights,
                     const Baseline& baseline);

AnalysisReport total_cost(const DiscretePlant& dp, const GainPair& gains,
                          const CostWeights& weights, const Baseline& baseline,
                          const CostMatrices& w, const QuantizationConfig& qc);

}  // namespace analysis

// PID ----------------------------------------------------------------------

struct PidWeights {
  double w1 = 1;
  double w2 = 1;
  double w3 = 1;
};

struct PidConstraints {
  double settling_time = 5.0;   // seconds
  double max_deviation = 0.05;  // output units
};

struct PidQuantization {
  std::vector<Interval> xhat_box{Interval{-1, 1}, Interval{-1, 1}};
  Interval uhat_box{-1, 1};
  int bits = 32;
  int coeff_bits = 0;
  MilpOptions milp;
};

struct Margins {
  double phase_margin_deg = kInfinity;
  double gain_margin = kInfinity;
  std::vector<double> gain_crossovers;   // theta values
  std::vector<double> phase_crossovers;  // theta values
};

struct PidReport {
  bool stable = false;
  double spectral_radius = 0;
  Margins margins;
  double gamma = 0;
  double b_eq1 = 0;
  double b_eq2 = 0;
  double settling_time = kInfinity;
  double peak_deviation = kInfinity;
  bool meets_constraints = false;
  double cost = kInfinity;

  double quantization_term() const { return gamma * (b_eq1 + b_eq2); }
};

namespace analysis {

inline constexpr int kMarginGrid = 4096;

// Discrete open loop L(e^{i theta}) = PID(e^{i theta}) * Plant(e^{i theta}).
Complex pid_loop_response(const DiscretePlant& dp, const PidRealization& pid,
                          double theta);

// Margins of the discrete loop, scanning theta in (0, pi].
Margins pid_margins(const DiscretePlant& dp, const PidRealization& pid,
                    int grid = kMarginGrid);

// Impulse of unit area at the plant input; time for |y| to stay within 2% of
// its peak.
double pid_settling_time(const PidClosedLoop& cl, const ContinuousPlant& plant,
                         double tau, double horizon);
// Peak |y| after a unit step disturbance at the plant input.
double pid_peak_deviation(const PidClosedLoop& cl, const DiscretePlant& dp,
                          double horizon);

PidReport pid_evaluate(const ContinuousPlant& plant, double tau,
                       const PidGains& gains, const PidWeights& weights,
                       const PidConstraints& constraints,
                       const PidQuantization& qc);

inline double pid_cost(const ContinuousPlant& plant, double tau,
                       const PidGains& gains, const PidWeights& weights,
                       const PidConstraints& constraints,
                       const PidQuantization& qc) {
  return pid_evaluate(plant, tau, gains, weights, constraints, qc).cost;
}

}  // namespace analysis
}  // namespace fxsynth
