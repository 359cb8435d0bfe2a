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

#include "fxsynth/pso.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

#include "fxsynth/error.hpp"

namespace fxsynth {

void SwarmConfig::validate() const {
  if (particles < 1) throw ConfigError("swarm needs at least one particle");
  if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
  if (!(y_min < y_max)) throw ConfigError("search box must satisfy y_min < y_max");
  for (double v : {c1, c2, w_max, y_min, y_max, v_max, stall_tolerance}) {
    if (!std::isfinite(v)) throw ConfigError("swarm parameters must be finite");
  }
  if (c1 < 0 || c2 < 0) throw ConfigError("acceleration constants must be nonnegative");
  if (stall_window < 1) throw ConfigError("stall_window must be positive");
  if (stall_tolerance < 0) throw ConfigError("stall_tolerance must be nonnegative");
  if (threads < 0) throw ConfigError("threads must be nonnegative");
}

namespace pso {

namespace {

double kInf() { return std::numeric_limits<double>::infinity(); }

double safe_cost(const CostFunction& cost, const Vector& x) {
  try {
    const double c = cost(x);
    return std::isnan(c) ? kInf() : c;
  } catch (const std::exception&) {
    return kInf();
  }
}

void evaluate_all(SwarmState& state, const SwarmConfig& config,
                  const CostFunction& cost) {
  const int count = static_cast<int>(state.particles.size());
  const int workers = std::min(worker_count(config), count);
  if (workers <= 1) {
    for (Particle& p : state.particles) p.cost = safe_cost(cost, p.position);
    return;
  }
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      Particle& p = state.particles[static_cast<std::size_t>(i)];
      p.cost = safe_cost(cost, p.position);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

// Personal then global bests in particle order, then the history rows.
void record(SwarmState& state, bool first, double tolerance) {
  const double previous = state.global_best_cost;
  double sum = 0;
  int finite = 0;
  int infinite = 0;
  for (Particle& p : state.particles) {
    if (first || p.cost < p.best_cost) {
      p.best_cost = p.cost;
      p.best_position = p.position;
    }
    if (first && &p == &state.particles.front()) {
      state.global_best_cost = p.best_cost;
      state.global_best = p.best_position;
    } else if (p.best_cost < state.global_best_cost) {
      state.global_best_cost = p.best_cost;
      state.global_best = p.best_position;
    }
    if (std::isfinite(p.cost)) {
      sum += p.cost;
      ++finite;
    } else {
      ++infinite;
    }
  }
  state.best_history.push_back(state.global_best_cost);
  state.mean_history.push_back(finite > 0 ? sum / finite : kInf());
  state.infinite_history.push_back(infinite);
  if (!first) {
    const double now = state.global_best_cost;
    const bool same = now == previous || std::fabs(now - previous) <= tolerance;
    state.stall_count = same ? state.stall_count + 1 : 0;
  }
}

std::string format_cost(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

}  // namespace

double inertia_weight(int iteration, const SwarmConfig& config) {
  const double w = config.w_max - (config.w_max - config.w_min()) *
                                      (iteration - 1) / config.max_iterations;
  return std::max(config.w_min(), w);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

int worker_count(const SwarmConfig& config) {
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("FXSYNTH_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SwarmState initialize(const SwarmConfig& config, const Vector& start,
                      const CostFunction& cost) {
  config.validate();
  if (start.size() == 0) throw ConfigError("empty starting position");
  SwarmState s;
  s.rng.seed(config.seed);
  s.iteration = 1;
  const double vmax = config.velocity_limit();
  for (int i = 0; i < config.particles; ++i) {
    Particle p;
    p.position = start.cwiseMax(config.y_min).cwiseMin(config.y_max);
    p.velocity.resize(start.size());
    for (Eigen::Index d = 0; d < start.size(); ++d) {
      p.velocity(d) = -vmax + 2.0 * vmax * uniform01(s.rng);
    }
    s.particles.push_back(std::move(p));
  }
  evaluate_all(s, config, cost);
  record(s, true, config.stall_tolerance);
  return s;
}

void step(SwarmState& state, const SwarmConfig& config,
          const CostFunction& cost) {
  const double w = inertia_weight(state.iteration, config);
  const double vmax = config.velocity_limit();
  for (Particle& p : state.particles) {
    const Eigen::Index dim = p.position.size();
    Vector r1(dim), r2(dim);
    if (config.per_dimension_random) {
      for (Eigen::Index d = 0; d < dim; ++d) r1(d) = uniform01(state.rng);
      for (Eigen::Index d = 0; d < dim; ++d) r2(d) = uniform01(state.rng);
    } else {
      r1.setConstant(uniform01(state.rng));
      r2.setConstant(uniform01(state.rng));
    }
    p.velocity = w * p.velocity +
                 config.c1 * r1.cwiseProduct(p.best_position - p.position) +
                 config.c2 * r2.cwiseProduct(state.global_best - p.position);
    p.velocity = p.velocity.cwiseMax(-vmax).cwiseMin(vmax);
    p.position = (p.position + p.velocity).cwiseMax(config.y_min).cwiseMin(config.y_max);
  }
  evaluate_all(state, config, cost);
  ++state.iteration;
  record(state, false, config.stall_tolerance);
}

bool stalled(const SwarmState& state, const SwarmConfig& config) {
  return state.stall_count >= config.stall_window;
}

Result run(const SwarmConfig& config, const Vector& start,
           const CostFunction& cost) {
  SwarmState s = initialize(config, start, cost);
  Result r;
  while (s.iteration < config.max_iterations) {
    if (stalled(s, config)) {
      r.stalled = true;
      break;
    }
    step(s, config, cost);
  }
  r.stalled = r.stalled || stalled(s, config);
  if (!std::isfinite(s.global_best_cost)) {
    throw NoSolutionError("particle swarm found no stabilizing candidate");
  }
  r.best = s.global_best;
  r.best_cost = s.global_best_cost;
  r.iterations = s.iteration;
  r.best_history = std::move(s.best_history);
  r.mean_history = std::move(s.mean_history);
  r.infinite_history = std::move(s.infinite_history);
  return r;
}

Vector flatten(const GainPair& gains) {
  Vector v(gains.k.size() + gains.l.size());
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < gains.k.rows(); ++r) {
    for (Eigen::Index c = 0; c < gains.k.cols(); ++c) v(i++) = gains.k(r, c);
  }
  for (Eigen::Index r = 0; r < gains.l.rows(); ++r) {
    for (Eigen::Index c = 0; c < gains.l.cols(); ++c) v(i++) = gains.l(r, c);
  }
  return v;
}

GainPair unflatten(const Vector& v, Eigen::Index n, Eigen::Index m,
                   Eigen::Index p) {
  if (v.size() != m * n + n * p) {
    throw DimensionError("particle dimension " + std::to_string(v.size()) +
                         " does not match m*n + n*p = " +
                         std::to_string(m * n + n * p));
  }
  GainPair g;
  g.k.resize(m, n);
  g.l.resize(n, p);
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) g.k(r, c) = v(i++);
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < p; ++c) g.l(r, c) = v(i++);
  }
  return g;
}

void write_history_csv(std::ostream& os, const Result& result) {
  os << "iteration,best_cost,mean_cost\n";
  for (std::size_t i = 0; i < result.best_history.size(); ++i) {
    os << (i + 1) << ',' << format_cost(result.best_history[i]) << ','
       << format_cost(result.mean_history[i]) << '\n';
  }
}

}  // namespace pso
}  // namespace fxsynth
