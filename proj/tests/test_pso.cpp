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
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "fxsynth/error.hpp"
#include "fxsynth/pso.hpp"

using namespace fxsynth;

namespace {

double sphere(const Vector& x) { return x.squaredNorm(); }

SwarmConfig small_swarm() {
  SwarmConfig c;
  c.particles = 12;
  c.max_iterations = 100;
  c.y_min = -10;
  c.y_max = 10;
  c.seed = 7;
  c.threads = 1;
  return c;
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

}  // namespace

TEST(Inertia, LinearScheduleWithFloor) {
  SwarmConfig c;
  EXPECT_DOUBLE_EQ(c.w_min(), -0.25);
  EXPECT_DOUBLE_EQ(pso::inertia_weight(1, c), 1.0);
  EXPECT_DOUBLE_EQ(pso::inertia_weight(51, c), 0.375);
  EXPECT_DOUBLE_EQ(pso::inertia_weight(100, c), 1.0 - 1.25 * 99 / 100);
  EXPECT_DOUBLE_EQ(pso::inertia_weight(500, c), -0.25);
  for (int l = 1; l < 100; ++l) {
    EXPECT_GT(pso::inertia_weight(l, c), pso::inertia_weight(l + 1, c));
  }
}

TEST(Config, Validate) {
  EXPECT_NO_THROW(SwarmConfig{}.validate());
  SwarmConfig c;
  c.particles = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.y_min = 5;
  c.y_max = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.c1 = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.stall_window = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  EXPECT_DOUBLE_EQ(c.velocity_limit(), 300);
  c.v_max = 4;
  EXPECT_DOUBLE_EQ(c.velocity_limit(), 4);
}

TEST(Uniform01, InUnitIntervalAndReproducible) {
  std::mt19937_64 a(3), b(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = pso::uniform01(a);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, pso::uniform01(b));
  }
}

// A flat cost never improves, so the stall window ends the run after 50
// further iterations.
TEST(Run, ConstantCostStopsOnStall) {
  SwarmConfig c = small_swarm();
  const pso::Result r = pso::run(c, vec({1, 2}), [](const Vector&) { return 3.0; });
  EXPECT_TRUE(r.stalled);
  EXPECT_EQ(r.iterations, 51);
  EXPECT_EQ(r.best_history.size(), 51u);
  EXPECT_EQ(r.best_cost, 3.0);
  EXPECT_EQ(r.best, vec({1, 2}));
}

TEST(Run, SphereConverges) {
  SwarmConfig c = small_swarm();
  c.stall_window = 1000;
  const pso::Result r = pso::run(c, vec({3, -2, 1}), sphere);
  EXPECT_EQ(r.iterations, 100);
  EXPECT_LT(r.best_cost, 1e-2);
  EXPECT_NEAR(r.best_cost, sphere(r.best), 0);
}

// Starting at the minimizer keeps it as the global best.
TEST(Run, StartAtOptimumStays) {
  const pso::Result r = pso::run(small_swarm(), vec({0, 0}), sphere);
  EXPECT_EQ(r.best_cost, 0.0);
  EXPECT_EQ(r.best, vec({0, 0}));
  for (double b : r.best_history) EXPECT_EQ(b, 0.0);
}

TEST(Run, BestHistoryNonIncreasingAndMeanOverFinite) {
  SwarmConfig c = small_swarm();
  // Infinite outside the unit disc around (2, 2).
  auto cost = [](const Vector& x) {
    const double d = (x - vec({2, 2})).norm();
    return d < 1 ? d : std::numeric_limits<double>::infinity();
  };
  const pso::Result r = pso::run(c, vec({2.5, 2.0}), cost);
  ASSERT_EQ(r.best_history.size(), r.mean_history.size());
  for (std::size_t i = 1; i < r.best_history.size(); ++i) {
    EXPECT_LE(r.best_history[i], r.best_history[i - 1]);
  }
  bool saw_infinite = false;
  for (std::size_t i = 0; i < r.mean_history.size(); ++i) {
    if (r.infinite_history[i] > 0) saw_infinite = true;
    if (r.infinite_history[i] < c.particles) EXPECT_TRUE(std::isfinite(r.mean_history[i]));
    EXPECT_GE(r.mean_history[i], r.best_history[i]);
  }
  EXPECT_TRUE(saw_infinite);
}

TEST(Run, ThrowingAndNanCostsCountAsInfinite) {
  auto cost = [](const Vector& x) {
    if (x(0) < 0) throw Error("bad");
    if (x(0) > 5) return std::numeric_limits<double>::quiet_NaN();
    return x(0);
  };
  const pso::Result r = pso::run(small_swarm(), vec({1}), cost);
  EXPECT_GE(r.best(0), 0.0);
  EXPECT_LE(r.best_cost, 1.0);
}

TEST(Run, NoFiniteCostThrows) {
  auto cost = [](const Vector&) { return std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(pso::run(small_swarm(), vec({1}), cost), NoSolutionError);
}

TEST(Run, DeterministicAcrossThreadCounts) {
  SwarmConfig a = small_swarm();
  SwarmConfig b = a;
  b.threads = 4;
  const pso::Result ra = pso::run(a, vec({3, -1}), sphere);
  const pso::Result rb = pso::run(b, vec({3, -1}), sphere);
  EXPECT_EQ(ra.best, rb.best);
  EXPECT_EQ(ra.best_history, rb.best_history);
  EXPECT_EQ(ra.mean_history, rb.mean_history);
  SwarmConfig c = a;
  c.seed = 8;
  EXPECT_NE(pso::run(c, vec({3, -1}), sphere).best_history, ra.best_history);
}

TEST(Step, PositionsAndVelocitiesStayInBox) {
  SwarmConfig c = small_swarm();
  c.y_min = -1;
  c.y_max = 1;
  c.v_max = 0.3;
  SwarmState s = pso::initialize(c, vec({5, -5}), sphere);
  for (const Particle& p : s.particles) EXPECT_EQ(p.position, vec({1, -1}));
  for (int i = 0; i < 30; ++i) {
    pso::step(s, c, [](const Vector& x) { return -x.sum(); });
    for (const Particle& p : s.particles) {
      EXPECT_LE(p.position.cwiseAbs().maxCoeff(), 1.0);
      EXPECT_LE(p.velocity.cwiseAbs().maxCoeff(), 0.3);
    }
  }
  EXPECT_EQ(s.iteration, 31);
}

// With c1 = c2 = 0 each velocity only decays by the inertia weight, so the
// trajectory follows from the initial velocities alone.
TEST(Step, PureInertia) {
  SwarmConfig c = small_swarm();
  c.c1 = 0;
  c.c2 = 0;
  c.particles = 3;
  c.y_min = -1e6;
  c.y_max = 1e6;
  c.v_max = 1;
  const Vector start = vec({0.5, -0.5});
  SwarmState s = pso::initialize(c, start, sphere);
  std::mt19937_64 rng(c.seed);
  std::vector<Vector> v, x;
  for (int i = 0; i < c.particles; ++i) {
    Vector vi(2);
    for (int d = 0; d < 2; ++d) vi(d) = -1 + 2 * pso::uniform01(rng);
    v.push_back(vi);
    x.push_back(start);
    EXPECT_EQ(s.particles[static_cast<std::size_t>(i)].velocity, vi);
  }
  for (int l = 1; l <= 4; ++l) {
    const double w = 1.0 - 2.0 * (l - 1) / c.max_iterations;  // w_min = -1
    EXPECT_DOUBLE_EQ(pso::inertia_weight(l, c), w);
    pso::step(s, c, sphere);
    for (int i = 0; i < c.particles; ++i) {
      v[static_cast<std::size_t>(i)] *= w;
      x[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
      EXPECT_NEAR((s.particles[static_cast<std::size_t>(i)].position - x[static_cast<std::size_t>(i)])
                      .norm(),
                  0, 1e-14);
    }
  }
}

TEST(Gains, FlattenRoundTrip) {
  GainPair g;
  g.k = linalg::from_rows({{1, 2, 3}, {4, 5, 6}});
  g.l = linalg::from_rows({{7, 8}, {9, 10}, {11, 12}});
  const Vector v = pso::flatten(g);
  ASSERT_EQ(v.size(), 12);
  for (int i = 0; i < 12; ++i) EXPECT_EQ(v(i), i + 1);
  const GainPair h = pso::unflatten(v, 3, 2, 2);
  EXPECT_EQ(h.k, g.k);
  EXPECT_EQ(h.l, g.l);
  EXPECT_THROW(pso::unflatten(v, 3, 2, 1), DimensionError);
}

TEST(History, CsvRows) {
  pso::Result r;
  r.best_history = {2.5, 1.25};
  r.mean_history = {std::numeric_limits<double>::infinity(), 1.5};
  std::ostringstream os;
  pso::write_history_csv(os, r);
  EXPECT_EQ(os.str(), "iteration,best_cost,mean_cost\n1,2.5,inf\n2,1.25,1.5\n");
}
