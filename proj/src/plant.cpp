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

#include "fxsynth/plant.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "fxsynth/error.hpp"
#include "fxsynth/fxprogram.hpp"

namespace fxsynth {

namespace {

void check_shapes(const Matrix& a, const Matrix& b, const Matrix& bbar,
                  const Matrix& c, const char* what) {
  linalg::require_square(a, std::string(what) + ".A");
  linalg::require_valid(b, std::string(what) + ".B");
  linalg::require_valid(bbar, std::string(what) + ".Bbar");
  linalg::require_valid(c, std::string(what) + ".C");
  if (b.rows() != a.rows() || bbar.rows() != a.rows() ||
      c.cols() != a.rows()) {
    throw DimensionError(std::string(what) +
                         ": B, Bbar rows and C columns must equal n = " +
                         std::to_string(a.rows()));
  }
}

Vector noise_at(const std::vector<Vector>& seq, long r, Eigen::Index size) {
  if (r < static_cast<long>(seq.size())) {
    const Vector& v = seq[static_cast<std::size_t>(r)];
    if (v.size() != size) throw DimensionError("disturbance sample size");
    return v;
  }
  return Vector::Zero(size);
}

}  // namespace

void ContinuousPlant::validate() const {
  check_shapes(a, b, bbar, c, "plant");
}

void DiscretePlant::validate() const {
  check_shapes(a, b, bbar, c, "discrete plant");
  if (!(tau > 0) || !std::isfinite(tau)) {
    throw Error("sampling time must be positive");
  }
}

namespace plant {

DiscretePlant discretize(const ContinuousPlant& plant, double tau) {
  plant.validate();
  if (!(tau > 0) || !std::isfinite(tau)) {
    throw Error("discretize: sampling time must be positive");
  }
  const Eigen::Index n = plant.states();
  const Eigen::Index m = plant.inputs();
  const Eigen::Index q = plant.disturbances();
  // exp([[A, B, Bbar], [0, 0, 0]] tau) carries both input integrals.
  Matrix aug = Matrix::Zero(n + m + q, n + m + q);
  aug.topLeftCorner(n, n) = plant.a;
  aug.block(0, n, n, m) = plant.b;
  aug.block(0, n + m, n, q) = plant.bbar;
  const Matrix e = linalg::mat_exp(aug, tau);
  DiscretePlant dp;
  dp.a = e.topLeftCorner(n, n);
  dp.b = e.block(0, n, n, m);
  dp.bbar = e.block(0, n + m, n, q);
  dp.c = plant.c;
  dp.tau = tau;
  return dp;
}

void check_gains(const DiscretePlant& dp, const GainPair& gains) {
  if (gains.k.rows() != dp.inputs() || gains.k.cols() != dp.states()) {
    throw DimensionError("K must be " + std::to_string(dp.inputs()) + "x" +
                         std::to_string(dp.states()));
  }
  if (gains.l.rows() != dp.states() || gains.l.cols() != dp.outputs()) {
    throw DimensionError("L must be " + std::to_string(dp.states()) + "x" +
                         std::to_string(dp.outputs()));
  }
  if (!gains.k.allFinite() || !gains.l.allFinite()) {
    throw Error("gains must be finite");
  }
}

ClosedLoop assemble_closed_loop(const DiscretePlant& dp,
                                const GainPair& gains) {
  dp.validate();
  check_gains(dp, gains);
  const Eigen::Index n = dp.states();
  const Eigen::Index m = dp.inputs();
  const Eigen::Index p = dp.outputs();
  const Eigen::Index q = dp.disturbances();
  const Matrix bk = dp.b * gains.k;
  const Matrix lc = gains.l * dp.c;
  ClosedLoop cl;
  cl.g.resize(2 * n, 2 * n);
  cl.g << dp.a, -bk, lc, dp.a - bk - lc;
  cl.h1 = Matrix::Zero(2 * n, q + p);
  cl.h1.topLeftCorner(n, q) = dp.bbar;
  cl.h1.bottomRightCorner(n, p) = gains.l;
  cl.h2 = Matrix::Zero(2 * n, n + m);
  cl.h2.topRightCorner(n, m) = dp.b;
  cl.h2.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
  cl.c_out = Matrix::Zero(p, 2 * n);
  cl.c_out.leftCols(n) = dp.c;
  return cl;
}

PidRealization pid_realization(const PidGains& gains, double tau) {
  if (!(tau > 0) || !std::isfinite(tau)) {
    throw Error("pid_realization: sampling time must be positive");
  }
  PidRealization r;
  r.a.resize(2, 2);
  r.a << 0, 1, 0, 1;
  r.b.resize(2, 1);
  r.b << 0, 1;
  r.c.resize(1, 2);
  r.c << gains.kd / tau, gains.ki * tau - gains.kd / tau;
  r.d.resize(1, 1);
  r.d << gains.kp + gains.ki * tau / 2 + gains.kd / tau;
  return r;
}

PidClosedLoop assemble_pid_closed_loop(const DiscretePlant& dp,
                                       const PidRealization& pid) {
  dp.validate();
  if (dp.inputs() != 1 || dp.outputs() != 1) {
    throw UnsupportedError("PID closed loop requires a SISO plant");
  }
  const Eigen::Index n = dp.states();
  const double d = pid.d(0, 0);
  PidClosedLoop cl;
  cl.m.resize(n + 2, n + 2);
  cl.m << dp.a - d * dp.b * dp.c, dp.b * pid.c, -pid.b * dp.c, pid.a;
  // e_q1 enters the controller state, e_q2 the plant input.
  cl.h = Matrix::Zero(n + 2, 3);
  cl.h.block(n, 0, 2, 2) = Matrix::Identity(2, 2);
  cl.h.block(0, 2, n, 1) = dp.b;
  cl.c_out = Matrix::Zero(1, n + 2);
  cl.c_out.leftCols(n) = dp.c;
  return cl;
}

ContinuousPlant realize_transfer_function(const std::vector<double>& num,
                                          const std::vector<double>& den) {
  if (den.empty() || den.front() == 0.0) {
    throw Error("transfer function: leading denominator coefficient is zero");
  }
  const auto n = static_cast<Eigen::Index>(den.size()) - 1;
  if (n < 1) throw DimensionError("transfer function: denominator degree 0");
  if (num.empty() || static_cast<Eigen::Index>(num.size()) > n) {
    throw DimensionError("transfer function must be strictly proper");
  }
  const double lead = den.front();
  ContinuousPlant p;
  p.a = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    p.a(0, j) = -den[static_cast<std::size_t>(j + 1)] / lead;
  }
  for (Eigen::Index i = 1; i < n; ++i) p.a(i, i - 1) = 1.0;
  p.b = Matrix::Zero(n, 1);
  p.b(0, 0) = 1.0;
  p.bbar = p.b;
  p.c = Matrix::Zero(1, n);
  const auto offset = n - static_cast<Eigen::Index>(num.size());
  for (std::size_t k = 0; k < num.size(); ++k) {
    p.c(0, offset + static_cast<Eigen::Index>(k)) = num[k] / lead;
  }
  p.validate();
  return p;
}

Disturbances gaussian_disturbances(const DiscretePlant& dp, long steps,
                                   double d_sigma, double v_sigma,
                                   unsigned long long seed) {
  std::mt19937_64 rng(seed);
  // Box-Muller on 53-bit uniforms keeps the sequence library independent.
  auto uniform = [&rng] {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
  };
  auto gauss = [&] {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  Disturbances out;
  for (long r = 0; r < steps; ++r) {
    Vector d(dp.disturbances());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d_sigma * gauss();
    Vector v(dp.outputs());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = v_sigma * gauss();
    out.d.push_back(std::move(d));
    out.v.push_back(std::move(v));
  }
  return out;
}

Trajectory simulate_ideal(const DiscretePlant& dp, const GainPair& gains,
                          const Vector& x0, long steps,
                          const Disturbances& noise, const Vector* xhat0) {
  dp.validate();
  check_gains(dp, gains);
  const Eigen::Index n = dp.states();
  if (x0.size() != n) throw DimensionError("x0 has wrong dimension");
  Vector x = x0;
  Vector xhat = xhat0 ? *xhat0 : Vector::Zero(n);
  if (xhat.size() != n) throw DimensionError("xhat0 has wrong dimension");
  Trajectory traj;
  traj.samples.reserve(static_cast<std::size_t>(std::max(0L, steps)));
  for (long r = 0; r < steps; ++r) {
    const Vector y = dp.c * x + noise_at(noise.v, r, dp.outputs());
    const Vector u = -gains.k * xhat;
    traj.samples.push_back(Sample{r, x, xhat, y, u});
    const Vector d = noise_at(noise.d, r, dp.disturbances());
    const Vector x_next = dp.a * x + dp.b * u + dp.bbar * d;
    xhat = dp.a * xhat + dp.b * u + gains.l * (y - dp.c * xhat);
    x = x_next;
  }
  return traj;
}

namespace {

std::int64_t quantize_input(const FxProgram& prog, std::size_t input,
                            double value) {
  const FxNode& node = prog.nodes[static_cast<std::size_t>(prog.inputs[input])];
  const std::int64_t q = quantize(value, node.format.m);
  if (!node.format.fits(q)) throw OverflowFault(node.id, q);
  return q;
}

// Moves an updated-state output back into the state input's format.
std::int64_t requantize(const FxProgram& prog, std::size_t state,
                        std::int64_t value) {
  const FxNode& in = prog.nodes[static_cast<std::size_t>(prog.inputs[state])];
  const FxNode& out = prog.nodes[static_cast<std::size_t>(prog.outputs[state].node)];
  const int shift = out.format.m - in.format.m;
  __int128 v = shift >= 0 ? shift_right_sm(value, shift)
                          : static_cast<__int128>(value) * (__int128{1} << -shift);
  if (v < in.format.min_int() || v > in.format.max_int()) {
    throw OverflowFault(in.id, static_cast<long long>(value));
  }
  return static_cast<std::int64_t>(v);
}

void check_layout(const DiscretePlant& dp, const FxProgram& prog,
                  Eigen::Index states, Eigen::Index meas, Eigen::Index ctrl) {
  if (prog.n_state != states || prog.n_meas != meas ||
      static_cast<Eigen::Index>(prog.inputs.size()) != states + meas ||
      static_cast<Eigen::Index>(prog.outputs.size()) != states + ctrl) {
    throw DimensionError("program layout does not match the plant");
  }
  (void)dp;
}

}  // namespace

Trajectory simulate_quantized(const DiscretePlant& dp, const FxProgram& prog,
                              const Vector& x0, long steps,
                              const Disturbances& noise) {
  dp.validate();
  const Eigen::Index n = dp.states();
  const Eigen::Index p = dp.outputs();
  const Eigen::Index m = dp.inputs();
  check_layout(dp, prog, n, p, m);
  if (x0.size() != n) throw DimensionError("x0 has wrong dimension");
  std::vector<std::int64_t> state(static_cast<std::size_t>(n), 0);
  Vector x = x0;
  Vector u = Vector::Zero(m);
  Trajectory traj;
  for (long r = 0; r < steps; ++r) {
    const Vector y = dp.c * x + noise_at(noise.v, r, p);
    Vector xhat(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      xhat(i) = to_real(state[static_cast<std::size_t>(i)],
                        prog.nodes[static_cast<std::size_t>(prog.inputs[static_cast<std::size_t>(i)])].format.m);
    }
    traj.samples.push_back(Sample{r, x, xhat, y, u});
    try {
      std::vector<std::int64_t> in = state;
      for (Eigen::Index i = 0; i < p; ++i) {
        in.push_back(quantize_input(prog, static_cast<std::size_t>(n + i), y(i)));
      }
      const EvalResult res = eval_fx(prog, in);
      for (Eigen::Index i = 0; i < n; ++i) {
        state[static_cast<std::size_t>(i)] =
            requantize(prog, static_cast<std::size_t>(i), res.outputs[static_cast<std::size_t>(i)]);
      }
      const Vector d = noise_at(noise.d, r, dp.disturbances());
      x = dp.a * x + dp.b * u + dp.bbar * d;
      for (Eigen::Index i = 0; i < m; ++i) {
        u(i) = output_real(prog, res, static_cast<std::size_t>(n + i));
      }
    } catch (const OverflowFault& fault) {
      traj.fault_step = r;
      traj.fault_node = fault.node();
      break;
    }
  }
  return traj;
}

Trajectory simulate_pid_quantized(const DiscretePlant& dp,
                                  const FxProgram& prog, const Vector& x0,
                                  long steps, const Disturbances& noise) {
  dp.validate();
  if (dp.inputs() != 1 || dp.outputs() != 1) {
    throw UnsupportedError("PID simulation requires a SISO plant");
  }
  check_layout(dp, prog, 2, 1, 1);
  const Eigen::Index n = dp.states();
  if (x0.size() != n) throw DimensionError("x0 has wrong dimension");
  std::vector<std::int64_t> state(2, 0);
  Vector x = x0;
  Trajectory traj;
  for (long r = 0; r < steps; ++r) {
    const Vector y = dp.c * x + noise_at(noise.v, r, 1);
    Vector xhat(2);
    for (std::size_t i = 0; i < 2; ++i) {
      xhat(static_cast<Eigen::Index>(i)) =
          to_real(state[i], prog.nodes[static_cast<std::size_t>(prog.inputs[i])].format.m);
    }
    Vector u = Vector::Zero(1);
    try {
      std::vector<std::int64_t> in = state;
      in.push_back(quantize_input(prog, 2, -y(0)));
      const EvalResult res = eval_fx(prog, in);
      u(0) = output_real(prog, res, 2);
      traj.samples.push_back(Sample{r, x, xhat, y, u});
      for (std::size_t i = 0; i < 2; ++i) {
        state[i] = requantize(prog, i, res.outputs[i]);
      }
    } catch (const OverflowFault& fault) {
      traj.samples.push_back(Sample{r, x, xhat, y, u});
      traj.fault_step = r;
      traj.fault_node = fault.node();
      break;
    }
    const Vector d = noise_at(noise.d, r, dp.disturbances());
    x = dp.a * x + dp.b * u + dp.bbar * d;
  }
  return traj;
}

double steady_state_peak(const Trajectory& traj, double fraction) {
  if (traj.samples.empty()) return 0;
  const std::size_t count = traj.samples.size();
  const auto tail = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(count)));
  double peak = 0;
  for (std::size_t i = count - std::min(count, std::max<std::size_t>(tail, 1));
       i < count; ++i) {
    peak = std::max(peak, traj.samples[i].y.norm());
  }
  return peak;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.samples.empty()) {
    os << "r\n";
    return;
  }
  const Sample& first = traj.samples.front();
  os << "r";
  for (Eigen::Index i = 0; i < first.x.size(); ++i) os << ",x" << i + 1;
  for (Eigen::Index i = 0; i < first.xhat.size(); ++i) os << ",xhat" << i + 1;
  for (Eigen::Index i = 0; i < first.y.size(); ++i) os << ",y" << i + 1;
  for (Eigen::Index i = 0; i < first.u.size(); ++i) os << ",u" << i + 1;
  os << "\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.15g", v);
    os << buf;
  };
  for (const Sample& s : traj.samples) {
    os << s.step;
    for (Eigen::Index i = 0; i < s.x.size(); ++i) put(s.x(i));
    for (Eigen::Index i = 0; i < s.xhat.size(); ++i) put(s.xhat(i));
    for (Eigen::Index i = 0; i < s.y.size(); ++i) put(s.y(i));
    for (Eigen::Index i = 0; i < s.u.size(); ++i) put(s.u(i));
    os << "\n";
  }
}

}  // namespace plant
}  // namespace fxsynth
