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
#include <functional>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "fxsynth/error.hpp"
#include "fxsynth/lp.hpp"

using namespace fxsynth;

namespace {

constexpr double kInf = 1e300;

// Brute force over the integer box of a pure-integer program.
double enumerate_best(const LinearProgram& lp, bool& feasible) {
  feasible = false;
  const bool max = lp.sense == Sense::Maximize;
  double best = max ? -kInf : kInf;
  std::vector<double> x(lp.variables.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == x.size()) {
      for (const auto& c : lp.constraints) {
        double lhs = 0;
        for (const auto& t : c.terms) lhs += t.coeff * x[static_cast<std::size_t>(t.var)];
        if (c.relation == Relation::LessEq && lhs > c.rhs + 1e-9) return;
        if (c.relation == Relation::GreaterEq && lhs < c.rhs - 1e-9) return;
        if (c.relation == Relation::Equal && std::abs(lhs - c.rhs) > 1e-9) return;
      }
      feasible = true;
      const double v = lp.evaluate(x);
      best = max ? std::max(best, v) : std::min(best, v);
      return;
    }
    for (double v = lp.variables[i].lower; v <= lp.variables[i].upper; v += 1) {
      x[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
  return best;
}

}  // namespace

TEST(Lp, TextbookMaximum) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
  LinearProgram lp;
  const int x = lp.add_variable("x", 0, 100);
  const int y = lp.add_variable("y", 0, 100);
  lp.add_constraint("c1", {{x, 1}}, Relation::LessEq, 4);
  lp.add_constraint("c2", {{y, 2}}, Relation::LessEq, 12);
  lp.add_constraint("c3", {{x, 3}, {y, 2}}, Relation::LessEq, 18);
  lp.objective = {{x, 3}, {y, 5}};
  const MilpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.objective, 36, 1e-9);
  EXPECT_NEAR(r.assignment[0], 2, 1e-9);
  EXPECT_NEAR(r.assignment[1], 6, 1e-9);
}

TEST(Lp, MinimizeWithEqualityAndGreater) {
  // min x + y, x + 2y = 4, x >= 1 -> x = 1, y = 1.5.
  LinearProgram lp;
  lp.sense = Sense::Minimize;
  const int x = lp.add_variable("x", -10, 10);
  const int y = lp.add_variable("y", -10, 10);
  lp.add_constraint("eq", {{x, 1}, {y, 2}}, Relation::Equal, 4);
  lp.add_constraint("ge", {{x, 1}}, Relation::GreaterEq, 1);
  lp.objective = {{x, 1}, {y, 1}};
  const MilpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.objective, 2.5, 1e-9);
  EXPECT_NEAR(r.assignment[0], 1, 1e-9);
  EXPECT_NEAR(r.assignment[1], 1.5, 1e-9);
}

TEST(Lp, Infeasible) {
  LinearProgram lp;
  const int x = lp.add_variable("x", 0, 1);
  lp.add_constraint("c", {{x, 1}}, Relation::GreaterEq, 2);
  lp.objective = {{x, 1}};
  EXPECT_EQ(solve_lp(lp).status, SolveStatus::Infeasible);
  EXPECT_EQ(solve_milp(lp).status, SolveStatus::Infeasible);
}

TEST(Lp, ValidateRejectsBadData) {
  LinearProgram lp;
  lp.add_variable("x", 0, std::numeric_limits<double>::infinity());
  EXPECT_THROW(lp.validate(), Error);
  LinearProgram lp2;
  lp2.add_variable("x", 1, 0);
  EXPECT_THROW(lp2.validate(), Error);
  LinearProgram lp3;
  lp3.add_variable("x", 0, 1);
  lp3.add_constraint("c", {{5, 1}}, Relation::LessEq, 1);
  EXPECT_THROW(lp3.validate(), Error);
  EXPECT_EQ(lp3.find("x"), 0);
  EXPECT_EQ(lp3.find("z"), -1);
}

// LP relaxation of max x + y, 2x + 2y <= 3 is 1.5; the integer optimum is 1.
TEST(Milp, IntegralityGap) {
  LinearProgram lp;
  const int x = lp.add_variable("x", 0, 5, true);
  const int y = lp.add_variable("y", 0, 5, true);
  lp.add_constraint("c", {{x, 2}, {y, 2}}, Relation::LessEq, 3);
  lp.objective = {{x, 1}, {y, 1}};
  EXPECT_NEAR(solve_lp(lp).objective, 1.5, 1e-9);
  const MilpResult r = solve_milp(lp);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-9);
  EXPECT_NEAR(r.bound, 1.0, 1e-9);
  MilpOptions relaxed;
  relaxed.relax_integrality = true;
  EXPECT_NEAR(solve_milp(lp, relaxed).objective, 1.5, 1e-9);
}

// Random small pure-integer programs against exhaustive enumeration.
TEST(Milp, MatchesEnumeration) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> coef(-5, 5);
  std::uniform_int_distribution<int> rhs(-3, 12);
  int feasible_cases = 0;
  for (int trial = 0; trial < 150; ++trial) {
    LinearProgram lp;
    lp.sense = trial % 2 ? Sense::Maximize : Sense::Minimize;
    const int n = 2 + trial % 3;
    for (int i = 0; i < n; ++i) lp.add_variable("x" + std::to_string(i), -3, 4, true);
    for (int c = 0; c < 3; ++c) {
      std::vector<LpTerm> terms;
      for (int i = 0; i < n; ++i) terms.push_back({i, double(coef(rng))});
      lp.add_constraint("c" + std::to_string(c), terms,
                        c == 2 && trial % 5 == 0 ? Relation::Equal : Relation::LessEq, rhs(rng));
    }
    for (int i = 0; i < n; ++i) lp.objective.push_back({i, double(coef(rng))});
    bool feasible = false;
    const double expect = enumerate_best(lp, feasible);
    const MilpResult r = solve_milp(lp);
    if (!feasible) {
      EXPECT_EQ(r.status, SolveStatus::Infeasible) << trial;
      continue;
    }
    ++feasible_cases;
    ASSERT_EQ(r.status, SolveStatus::Optimal) << trial;
    EXPECT_NEAR(r.objective, expect, 1e-7) << trial;
    EXPECT_NEAR(lp.evaluate(r.assignment), r.objective, 1e-7);
    for (double v : r.assignment) EXPECT_NEAR(v, std::round(v), 1e-6);
  }
  EXPECT_GT(feasible_cases, 50);
}

// With a node cap the solver reports a valid upper bound, never below the
// true optimum.
TEST(Milp, NodeLimitKeepsBoundSound) {
  LinearProgram lp;
  const int n = 8;
  for (int i = 0; i < n; ++i) lp.add_variable("x" + std::to_string(i), 0, 1, true);
  std::vector<LpTerm> w;
  for (int i = 0; i < n; ++i) {
    w.push_back({i, 3.0 + i * 1.37});
    lp.objective.push_back({i, 2.0 + std::fmod(i * 2.71, 3.0)});
  }
  lp.add_constraint("cap", w, Relation::LessEq, 20.5);
  bool feasible = false;
  const double truth = enumerate_best(lp, feasible);
  MilpOptions capped;
  capped.node_limit = 2;
  const MilpResult r = solve_milp(lp, capped);
  EXPECT_GE(r.bound, truth - 1e-9);
  if (r.status == SolveStatus::NodeLimit && r.has_solution) {
    EXPECT_LE(r.objective, truth + 1e-9);
  }
  EXPECT_NEAR(solve_milp(lp).objective, truth, 1e-9);
}

TEST(Milp, LpFormatText) {
  LinearProgram lp;
  const int x = lp.add_variable("x", -1, 2, true);
  lp.add_constraint("c", {{x, 1}}, Relation::LessEq, 1);
  lp.objective = {{x, 1}};
  const std::string s = to_lp_format(lp);
  for (const char* k : {"Maximize", "Subject To", "Bounds", "General", "End"}) {
    EXPECT_NE(s.find(k), std::string::npos) << k;
  }
}
