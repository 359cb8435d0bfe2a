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

#include <algorithm>
#include <cmath>

#include "fxsynth/analysis.hpp"
#include "fxsynth/error.hpp"
#include "fxsynth/fxprogram.hpp"

namespace fxsynth::analysis {

namespace {

constexpr int kBisections = 60;
// Fraction of the peak that counts as settled.
constexpr double kSettleBand = 0.02;
constexpr double kDefaultHorizon = 20.0;  // seconds

Complex transfer(const Matrix& a, const Matrix& b, const Matrix& c,
                 const Complex& z) {
  ComplexMatrix m = -a.cast<Complex>();
  m.diagonal().array() += z;
  const ComplexMatrix x = m.partialPivLu().solve(b.cast<Complex>());
  return (c.cast<Complex>() * x)(0, 0);
}

double wrap_phase_margin(const Complex& l) {
  double pm = 180.0 + std::arg(l) * 180.0 / std::acos(-1.0);
  if (pm > 180.0) pm -= 360.0;
  return pm;
}

template <class F>
double bisect(F f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < kBisections; ++i) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if ((fm < 0) == (fa < 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Complex pid_loop_response(const DiscretePlant& dp, const PidRealization& pid,
                          double theta) {
  const Complex z = std::polar(1.0, theta);
  const Complex controller = transfer(pid.a, pid.b, pid.c, z) + pid.d(0, 0);
  return controller * transfer(dp.a, dp.b, dp.c, z);
}

Margins pid_margins(const DiscretePlant& dp, const PidRealization& pid,
                    int grid) {
  if (grid < 2) throw Error("pid_margins: grid needs at least 2 points");
  const double pi = std::acos(-1.0);
  auto loop = [&](double th) { return pid_loop_response(dp, pid, th); };
  Margins mg;
  std::vector<Complex> val(static_cast<std::size_t>(grid) + 1);
  for (int k = 1; k <= grid; ++k) val[static_cast<std::size_t>(k)] = loop(pi * k / grid);
  for (int k = 1; k < grid; ++k) {
    const double a = pi * k / grid;
    const double b = pi * (k + 1) / grid;
    const Complex la = val[static_cast<std::size_t>(k)];
    const Complex lb = val[static_cast<std::size_t>(k) + 1];
    if ((std::abs(la) - 1.0 < 0) != (std::abs(lb) - 1.0 < 0)) {
      const double th = bisect([&](double t) { return std::abs(loop(t)) - 1.0; }, a, b);
      mg.gain_crossovers.push_back(th);
      mg.phase_margin_deg = std::min(mg.phase_margin_deg, wrap_phase_margin(loop(th)));
    }
    // The real axis at theta = pi is handled below.
    if (k + 1 < grid && (la.imag() < 0) != (lb.imag() < 0)) {
      const double th = bisect([&](double t) { return loop(t).imag(); }, a, b);
      const Complex lt = loop(th);
      if (lt.real() < 0) {
        mg.phase_crossovers.push_back(th);
        mg.gain_margin = std::min(mg.gain_margin, 1.0 / std::abs(lt));
      }
    }
  }
  const Complex lpi = val[static_cast<std::size_t>(grid)];
  if (lpi.real() < 0) {
    mg.phase_crossovers.push_back(pi);
    mg.gain_margin = std::min(mg.gain_margin, 1.0 / std::abs(lpi));
  }
  return mg;
}

double pid_settling_time(const PidClosedLoop& cl, const ContinuousPlant& plant,
                         double tau, double horizon) {
  const Eigen::Index n = plant.states();
  Vector w = Vector::Zero(cl.m.rows());
  w.head(n) = plant.b.col(0);
  const long steps = static_cast<long>(std::ceil(horizon / tau));
  std::vector<double> y(static_cast<std::size_t>(steps) + 1);
  double peak = 0;
  for (long r = 0; r <= steps; ++r) {
    y[static_cast<std::size_t>(r)] = std::fabs((cl.c_out * w)(0));
    peak = std::max(peak, y[static_cast<std::size_t>(r)]);
    w = cl.m * w;
  }
  if (peak == 0) return 0;
  long last = -1;
  for (long r = 0; r <= steps; ++r) {
    if (y[static_cast<std::size_t>(r)] > kSettleBand * peak) last = r;
  }
  if (last == steps) return kInfinity;
  return static_cast<double>(last + 1) * tau;
}

double pid_peak_deviation(const PidClosedLoop& cl, const DiscretePlant& dp,
                          double horizon) {
  const Eigen::Index n = dp.states();
  Vector drive = Vector::Zero(cl.m.rows());
  drive.head(n) = dp.bbar.col(0);
  Vector w = Vector::Zero(cl.m.rows());
  const long steps = static_cast<long>(std::ceil(horizon / dp.tau));
  double peak = 0;
  for (long r = 0; r <= steps; ++r) {
    peak = std::max(peak, std::fabs((cl.c_out * w)(0)));
    w = cl.m * w + drive;
  }
  return peak;
}

PidReport pid_evaluate(const ContinuousPlant& plant, double tau,
                       const PidGains& gains, const PidWeights& weights,
                       const PidConstraints& constraints,
                       const PidQuantization& qc) {
  const DiscretePlant dp = plant::discretize(plant, tau);
  const PidRealization pid = plant::pid_realization(gains, tau);
  const PidClosedLoop cl = plant::assemble_pid_closed_loop(dp, pid);
  PidReport rep;
  rep.spectral_radius = linalg::spectral_radius(cl.m);
  rep.stable = is_hurwitz(cl.m);
  if (!rep.stable) return rep;
  rep.margins = pid_margins(dp, pid);
  rep.gamma = l2_gain(cl.m, cl.h, cl.c_out);
  const FxProgram prog =
      synthesize_pid_program(pid, qc.xhat_box, qc.uhat_box, qc.bits, qc.coeff_bits);
  const errbound::ProgramBounds pb = errbound::bound_program_error(prog, qc.milp);
  rep.b_eq1 = pb.group_norm(0, 2);
  rep.b_eq2 = pb.group_norm(2, 1);
  const double horizon = std::max(kDefaultHorizon, 4.0 * constraints.settling_time);
  rep.settling_time = pid_settling_time(cl, plant, tau, horizon);
  rep.peak_deviation = pid_peak_deviation(cl, dp, horizon);
  rep.meets_constraints = rep.settling_time <= constraints.settling_time &&
                          rep.peak_deviation <= constraints.max_deviation;
  if (!rep.meets_constraints) return rep;
  // Margin magnitudes; 1/inf contributes nothing.
  const double pm = std::fabs(rep.margins.phase_margin_deg);
  const double gm = std::fabs(rep.margins.gain_margin);
  rep.cost = weights.w1 / pm + weights.w2 / gm +
             weights.w3 * rep.quantization_term();
  return rep;
}

}  // namespace fxsynth::analysis
