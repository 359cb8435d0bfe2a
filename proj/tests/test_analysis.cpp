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
#include <random>

#include <gtest/gtest.h>

#include "fxsynth/analysis.hpp"
#include "fxsynth/error.hpp"
#include "fxsynth/problem.hpp"
#include "fxsynth/synthesis.hpp"

using namespace fxsynth;
using linalg::from_rows;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Hurwitz, StrictlyInsideUnitCircle) {
  EXPECT_TRUE(analysis::is_hurwitz(from_rows({{0.5, 1}, {0, -0.9}})));
  EXPECT_FALSE(analysis::is_hurwitz(from_rows({{1.0}})));
  EXPECT_FALSE(analysis::is_hurwitz(from_rows({{0, 1}, {-1, 0}})));
}

// gamma = max |1 / (e^{i theta} - a)| = 1 / (1 - |a|).
TEST(L2Gain, ScalarClosedForm) {
  for (double a : {0.9, 0.5, 0.0, -0.3, -0.95}) {
    const double g = analysis::l2_gain(from_rows({{a}}), from_rows({{1}}), from_rows({{1}}));
    EXPECT_NEAR(g, 1.0 / (1.0 - std::abs(a)), 1e-9) << a;
  }
  // Scaling of input and output multiplies through.
  EXPECT_NEAR(analysis::l2_gain(from_rows({{0.6}}), from_rows({{3}}), from_rows({{0.5}})),
              1.5 / 0.4, 1e-9);
  EXPECT_THROW(analysis::l2_gain(from_rows({{1.2}}), from_rows({{1}}), from_rows({{1}})), Error);
}

// A lightly damped pair peaks between grid points; refinement must find it.
TEST(L2Gain, ResonancePeakBetweenGridPoints) {
  const double r = 0.995, w = 0.7137;
  const Matrix g = from_rows({{r * std::cos(w), -r * std::sin(w)}, {r * std::sin(w), r * std::cos(w)}});
  const Matrix h = from_rows({{1}, {0}});
  const Matrix c = from_rows({{1, 0}});
  double dense = 0;
  for (int i = 0; i <= 400000; ++i) {
    const double th = M_PI * i / 400000.0;
    dense = std::max(dense, linalg::complex_resolvent_norm(g, h, c, th));
  }
  const double coarse = analysis::l2_gain(g, h, c, 64);
  EXPECT_GE(coarse, dense * (1 - 1e-9));
  EXPECT_NEAR(coarse, dense, 1e-6 * dense);
}

TEST(L2Gain, ConjugateSymmetry) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix g = random_matrix(rng, 3, 3);
    g *= 0.9 / linalg::spectral_radius(g);
    const Matrix h = random_matrix(rng, 3, 2);
    const Matrix c = random_matrix(rng, 2, 3);
    for (double th : {0.1, 0.7, 1.9, 3.0}) {
      EXPECT_NEAR(linalg::complex_resolvent_norm(g, h, c, th),
                  linalg::complex_resolvent_norm(g, h, c, -th),
                  1e-12 * linalg::complex_resolvent_norm(g, h, c, th));
    }
  }
}

TEST(L2Gain, GridDoublingOnBenchmarks) {
  for (const std::string& name : preset_names()) {
    const ProblemSpec s = preset(name);
    if (s.mode != Mode::Lqg) continue;
    const DiscretePlant dp = s.discrete();
    const ClosedLoop cl = plant::assemble_closed_loop(dp, *s.reference_gains);
    for (GainInput which : {GainInput::H1, GainInput::H2}) {
      const double a = analysis::l2_gain(cl, which, analysis::kL2Grid);
      const double b = analysis::l2_gain(cl, which, 2 * analysis::kL2Grid);
      EXPECT_LT(rel(a, b), 1e-6) << name;
    }
  }
}

// x0' S x0 equals the summed stage cost of the closed loop.
TEST(LqrCost, MatchesSimulatedSum) {
  std::mt19937_64 rng(2024);
  int done = 0;
  while (done < 20) {
    const int n = 1 + done % 4;
    const int m = 1 + done % 2;
    DiscretePlant dp;
    dp.a = random_matrix(rng, n, n);
    dp.b = random_matrix(rng, n, m);
    dp.bbar = dp.b;
    dp.c = Matrix::Identity(1, n);
    dp.tau = 1;
    Matrix q = random_matrix(rng, n, n);
    q = q * q.transpose() + 0.1 * Matrix::Identity(n, n);
    Matrix r = random_matrix(rng, m, m);
    r = r * r.transpose() + 0.1 * Matrix::Identity(m, m);
    Matrix k;
    try {
      k = linalg::solve_dare(dp.a, dp.b, q, r).gain;
    } catch (const Error&) {
      continue;
    }
    // Off-optimal but stabilizing gains too.
    k += 0.01 * random_matrix(rng, m, n);
    const Matrix cl = dp.a - dp.b * k;
    if (linalg::spectral_radius(cl) > 0.99) continue;
    const Matrix s = analysis::lqr_cost_matrix(dp, k, q, r);
    const Matrix w = q + k.transpose() * r * k;
    EXPECT_LT((cl.transpose() * s * cl - s + w).norm(), 1e-9 * s.norm());
    const Vector x0 = random_matrix(rng, n, 1);
    Vector x = x0;
    double sum = 0;
    for (int t = 0; t < 50000; ++t) {
      sum += x.dot(w * x);
      x = cl * x;
    }
    EXPECT_LT(rel(sum, x0.dot(s * x0)), 1e-3) << done;
    ++done;
  }
}

// The DARE solution is below S(K) for every K, so the optimum has the least
// norm.
TEST(OptimalGains, MinimizeCostNorms) {
  const ProblemSpec s = preset("bicycle");
  const DiscretePlant dp = s.discrete();
  const CostMatrices w = CostMatrices::identity(dp);
  const GainPair g = analysis::optimal_gains(dp, w);
  const double s0 = analysis::lqr_cost_norm(dp, g.k, w.q, w.r);
  const double p0 = analysis::lqg_cost_norm(dp, g.l, w.qhat, w.rhat);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Matrix dk = 0.05 * random_matrix(rng, 1, 2);
    const Matrix dl = 0.002 * random_matrix(rng, 2, 1);
    EXPECT_GE(analysis::lqr_cost_norm(dp, g.k + dk, w.q, w.r), s0 * (1 - 1e-12));
    EXPECT_GE(analysis::lqg_cost_norm(dp, g.l + dl, w.qhat, w.rhat), p0 * (1 - 1e-12));
  }
  // Published LQR/LQG gains for this system, printed to four decimals.
  EXPECT_NEAR(g.k(0, 0), 5.1538, 5e-4);
  EXPECT_NEAR(g.k(0, 1), 12.9724, 5e-4);
  EXPECT_NEAR(g.l(0, 0), 0.0317, 5e-4);
  EXPECT_NEAR(g.l(1, 0), 0.0118, 5e-4);
}

TEST(Cost, BaselineNormalizesToWeightSum) {
  for (const char* name : {"bicycle", "batch_reactor"}) {
    const ProblemSpec s = preset(name);
    const DiscretePlant dp = s.discrete();
    const CostMatrices w = s.cost_matrices(dp);
    const QuantizationConfig qc = s.quantization(dp);
    const Baseline b = analysis::compute_baseline(dp, w, qc);
    EXPECT_NEAR(analysis::weighted_cost(b.report, s.weights, b), s.weights.sum(), 1e-12);
    const AnalysisReport r = analysis::total_cost(dp, b.gains, s.weights, b, w, qc);
    EXPECT_NEAR(r.cost, s.weights.sum(), 1e-12);
  }
}

TEST(Cost, UnstableGainsAreInfinite) {
  const ProblemSpec s = preset("bicycle");
  const DiscretePlant dp = s.discrete();
  const CostMatrices w = s.cost_matrices(dp);
  const QuantizationConfig qc = s.quantization(dp);
  const Baseline b = analysis::compute_baseline(dp, w, qc);
  const GainPair bad{from_rows({{-5, 0}}), from_rows({{0}, {0}})};
  const AnalysisReport r = analysis::total_cost(dp, bad, s.weights, b, w, qc);
  EXPECT_FALSE(r.stable);
  EXPECT_TRUE(std::isinf(r.cost));
}

TEST(Cost, WeightsValidate) {
  EXPECT_NO_THROW(CostWeights{}.validate());
  EXPECT_THROW((CostWeights{0, 0, 0, 0}.validate()), ConfigError);
  EXPECT_THROW((CostWeights{1, -1, 0, 0}.validate()), ConfigError);
  EXPECT_THROW((CostWeights{1, NAN, 0, 0}.validate()), ConfigError);
}

// Published bicycle metrics for both gain sets at tau = 0.01 and 16 bits.
TEST(Bicycle, PublishedMetrics) {
  const ProblemSpec s = preset("bicycle");
  const PublishedTargets t = *published_targets("bicycle");
  const AnalysisReport base = analyze_gains(s, *s.reference_baseline);
  const AnalysisReport syn = analyze_gains(s, *s.reference_gains);
  ASSERT_TRUE(base.stable && syn.stable);
  EXPECT_LT(rel(base.s_norm, t.s_baseline), 0.02);
  EXPECT_LT(rel(syn.s_norm, t.s_synth), 0.02);
  EXPECT_LT(rel(base.p_norm, t.p_baseline), 0.02);
  EXPECT_LT(rel(syn.p_norm, t.p_synth), 0.02);
  EXPECT_LT(rel(base.gamma1y, t.gamma1y_baseline), 0.05);
  EXPECT_LT(rel(syn.gamma1y, t.gamma1y_synth), 0.05);
  EXPECT_LT(rel(syn.radius_const(), t.radius_synth), 0.05);
  // The baseline radius comes out tighter than published (exact MILP bound).
  EXPECT_LT(base.radius_const(), t.radius_baseline);
  EXPECT_GT(base.radius_const(), 0.8 * t.radius_baseline);
  // Improvement factor of at least 2.55.
  EXPECT_GT(base.radius_const() / syn.radius_const(), 2.55);
}

TEST(Evaluate, Deterministic) {
  const ProblemSpec s = preset("dc_motor");
  const AnalysisReport a = analyze_gains(s, *s.reference_gains);
  const AnalysisReport b = analyze_gains(s, *s.reference_gains);
  EXPECT_EQ(a.s_norm, b.s_norm);
  EXPECT_EQ(a.gamma2y, b.gamma2y);
  EXPECT_EQ(a.output_bounds, b.output_bounds);
}
