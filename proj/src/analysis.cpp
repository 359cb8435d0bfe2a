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

#include "fxsynth/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fxsynth/error.hpp"
#include "fxsynth/fxprogram.hpp"

namespace fxsynth {

void CostWeights::validate() const {
  bool positive = false;
  for (double w : {w1, w2, w3, w4}) {
    if (!std::isfinite(w) || w < 0) {
      throw ConfigError("cost weights must be finite and nonnegative");
    }
    positive = positive || w > 0;
  }
  if (!positive) throw ConfigError("at least one cost weight must be positive");
}

CostMatrices CostMatrices::identity(const DiscretePlant& dp) {
  CostMatrices w;
  w.q = Matrix::Identity(dp.states(), dp.states());
  w.r = Matrix::Identity(dp.inputs(), dp.inputs());
  w.qhat = Matrix::Identity(dp.disturbances(), dp.disturbances());
  w.rhat = Matrix::Identity(dp.outputs(), dp.outputs());
  return w;
}

void CostMatrices::validate(const DiscretePlant& dp) const {
  auto check = [](const Matrix& m, Eigen::Index size, const char* what) {
    if (m.rows() != size || m.cols() != size) {
      throw DimensionError(std::string(what) + " must be " +
                           std::to_string(size) + "x" + std::to_string(size));
    }
    linalg::require_valid(m, what);
  };
  check(q, dp.states(), "Q");
  check(r, dp.inputs(), "R");
  check(qhat, dp.disturbances(), "Qhat");
  check(rhat, dp.outputs(), "Rhat");
}

QuantizationConfig QuantizationConfig::unit_boxes(const DiscretePlant& dp,
                                                  int bits) {
  QuantizationConfig qc;
  qc.y_box.assign(static_cast<std::size_t>(dp.outputs()), Interval{-1, 1});
  qc.xhat_box.assign(static_cast<std::size_t>(dp.states()), Interval{-1, 1});
  qc.bits = bits;
  return qc;
}

namespace analysis {

namespace {

constexpr double kGoldenTol = 1e-9;
constexpr int kRefineMaxima = 8;

double resolvent(const Matrix& g, const Matrix& h, const Matrix& c_out,
                 double theta) {
  return linalg::complex_resolvent_norm(g, h, c_out, theta);
}

// Golden-section search for a local maximum on [a, b].
std::pair<double, double> golden_max(const Matrix& g, const Matrix& h,
                                     const Matrix& c_out, double a, double b) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = resolvent(g, h, c_out, x1);
  double f2 = resolvent(g, h, c_out, x2);
  while (b - a > kGoldenTol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = resolvent(g, h, c_out, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = resolvent(g, h, c_out, x1);
    }
  }
  return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace

bool is_hurwitz(const Matrix& m) {
  linalg::require_square(m, "is_hurwitz");
  return linalg::spectral_radius(m) < 1.0 - 1e-9;
}

double l2_gain(const Matrix& g, const Matrix& h, const Matrix& c_out,
               int grid) {
  if (grid < 3) throw Error("l2_gain: grid needs at least 3 points");
  if (!is_hurwitz(g)) throw Error("l2_gain: closed-loop matrix is not Hurwitz");
  const double pi = std::acos(-1.0);
  std::vector<double> theta(static_cast<std::size_t>(grid));
  std::vector<double> val(static_cast<std::size_t>(grid));
  for (int k = 0; k < grid; ++k) {
    const auto i = static_cast<std::size_t>(k);
    theta[i] = pi * k / (grid - 1);
    val[i] = resolvent(g, h, c_out, theta[i]);
  }
  double best = *std::max_element(val.begin(), val.end());
  // Local maxima, largest first.
  std::vector<int> peaks;
  for (int k = 0; k < grid; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const bool left = k == 0 || val[i] >= val[i - 1];
    const bool right = k == grid - 1 || val[i] >= val[i + 1];
    if (left && right) peaks.push_back(k);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](int a, int b) {
    return val[static_cast<std::size_t>(a)] > val[static_cast<std::size_t>(b)];
  });
  if (peaks.size() > static_cast<std::size_t>(kRefineMaxima)) {
    peaks.resize(static_cast<std::size_t>(kRefineMaxima));
  }
  for (int k : peaks) {
    const double a = theta[static_cast<std::size_t>(std::max(0, k - 1))];
    const double b = theta[static_cast<std::size_t>(std::min(grid - 1, k + 1))];
    best = std::max(best, golden_max(g, h, c_out, a, b).second);
  }
  return best;
}

double l2_gain(const ClosedLoop& cl, GainInput which, int grid) {
  return l2_gain(cl.g, which == GainInput::H1 ? cl.h1 : cl.h2, cl.c_out, grid);
}

Matrix lqr_cost_matrix(const DiscretePlant& dp, const Matrix& k,
                       const Matrix& q, const Matrix& r) {
  const Matrix m = dp.a - dp.b * k;
  if (!is_hurwitz(m)) throw Error("lqr_cost: A - BK is not Hurwitz");
  return linalg::solve_discrete_lyapunov(m, q + k.transpose() * r * k);
}

double lqr_cost_norm(const DiscretePlant& dp, const Matrix& k, const Matrix& q,
                     const Matrix& r) {
  return linalg::induced_2_norm(lqr_cost_matrix(dp, k, q, r));
}

Matrix lqg_cost_matrix(const DiscretePlant& dp, const Matrix& l,
                       const Matrix& qhat, const Matrix& rhat) {
  const Matrix m = dp.a - l * dp.c;
  if (!is_hurwitz(m)) throw Error("lqg_cost: A - LC is not Hurwitz");
  const Matrix w =
      dp.bbar * qhat * dp.bbar.transpose() + l * rhat * l.transpose();
  return linalg::solve_discrete_lyapunov(m.transpose(), w);
}

double lqg_cost_norm(const DiscretePlant& dp, const Matrix& l,
                     const Matrix& qhat, const Matrix& rhat) {
  return linalg::induced_2_norm(lqg_cost_matrix(dp, l, qhat, rhat));
}

GainPair optimal_gains(const DiscretePlant& dp, const CostMatrices& w) {
  dp.validate();
  w.validate(dp);
  GainPair g;
  g.k = linalg::solve_dare(dp.a, dp.b, w.q, w.r).gain;
  const Matrix qd = dp.bbar * w.qhat * dp.bbar.transpose();
  g.l = linalg::solve_dare(dp.a.transpose(), dp.c.transpose(), qd, w.rhat)
            .gain.transpose();
  return g;
}

AnalysisReport evaluate(const DiscretePlant& dp, const GainPair& gains,
                        const CostMatrices& w, const QuantizationConfig& qc) {
  plant::check_gains(dp, gains);
  AnalysisReport rep;
  if (!is_hurwitz(dp.a - dp.b * gains.k) || !is_hurwitz(dp.a - gains.l * dp.c)) {
    return rep;
  }
  const ClosedLoop cl = plant::assemble_closed_loop(dp, gains);
  // Separation makes G Hurwitz here, but guard against round-off.
  if (!is_hurwitz(cl.g)) return rep;
  rep.s_norm = lqr_cost_norm(dp, gains.k, w.q, w.r);
  rep.p_norm = lqg_cost_norm(dp, gains.l, w.qhat, w.rhat);
  rep.gamma1y = l2_gain(cl, GainInput::H1);
  rep.gamma2y = l2_gain(cl, GainInput::H2);
  const FxProgram prog = synthesize_controller_program(
      dp, gains, qc.y_box, qc.xhat_box, qc.bits, qc.coeff_bits);
  const errbound::ProgramBounds pb = errbound::bound_program_error(prog, qc.milp);
  rep.output_bounds = pb.outputs;
  rep.b_e2 = pb.b_e2;
  rep.bounds_exact = pb.exact;
  rep.stable = true;
  return rep;
}

Baseline compute_baseline(const DiscretePlant& dp, const CostMatrices& w,
                          const QuantizationConfig& qc) {
  Baseline b;
  b.gains = optimal_gains(dp, w);
  b.report = evaluate(dp, b.gains, w, qc);
  if (!b.report.stable) {
    throw NoSolutionError("baseline LQR/LQG gains do not stabilize the plant");
  }
  b.s_norm = b.report.s_norm;
  b.p_norm = b.report.p_norm;
  b.gamma1y = b.report.gamma1y;
  b.gamma2y = b.report.gamma2y;
  b.b_e2 = b.report.b_e2;
  for (double v : {b.s_norm, b.p_norm, b.gamma1y, b.gamma2y * b.b_e2}) {
    if (!(v > 0) || !std::isfinite(v)) {
      throw NoSolutionError("baseline metric is zero or not finite");
    }
  }
  return b;
}

double weighted_cost(const AnalysisReport& r, const CostWeights& weights,
                     const Baseline& b) {
  if (!r.stable) return kInfinity;
  return weights.w1 * r.s_norm / b.s_norm + weights.w2 * r.p_norm / b.p_norm +
         weights.w3 * r.gamma1y / b.gamma1y +
         weights.w4 * (r.gamma2y * r.b_e2) / (b.gamma2y * b.b_e2);
}

AnalysisReport total_cost(const DiscretePlant& dp, const GainPair& gains,
                          const CostWeights& weights, const Baseline& baseline,
                          const CostMatrices& w, const QuantizationConfig& qc) {
  AnalysisReport r = evaluate(dp, gains, w, qc);
  r.cost = weighted_cost(r, weights, baseline);
  return r;
}

}  // namespace analysis
}  // namespace fxsynth
