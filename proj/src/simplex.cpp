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

#include "simplex.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "fxsynth/error.hpp"

namespace fxsynth::detail {

namespace {

constexpr double kPrimalTol = 1e-10;
constexpr double kPivotTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kRefactorEvery = 32;

}  // namespace

DualSimplex::DualSimplex(int rows, int cols,
                         const std::vector<double>& a_rowmajor,
                         const std::vector<double>& cost,
                         const std::vector<double>& lo,
                         const std::vector<double>& hi,
                         const std::vector<double>& row_lo,
                         const std::vector<double>& row_hi)
    : m_(rows), n_(cols), ncols_(rows + cols), a_(a_rowmajor) {
  const auto total = static_cast<std::size_t>(ncols_);
  tab_.assign(static_cast<std::size_t>(m_) * total, 0.0);
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < n_; ++j) {
      t(i, j) = a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                   static_cast<std::size_t>(j)];
    }
    t(i, n_ + i) = 1.0;
  }
  cost_.assign(total, 0.0);
  lo_.assign(total, 0.0);
  hi_.assign(total, 0.0);
  state_.assign(total, VarState::Basic);
  for (int j = 0; j < n_; ++j) {
    const auto k = static_cast<std::size_t>(j);
    cost_[k] = cost[k];
    lo_[k] = lo[k];
    hi_[k] = hi[k];
    state_[k] = cost[k] >= 0 ? VarState::AtLower : VarState::AtUpper;
  }
  // Logical z_i = -(A x)_i.
  for (int i = 0; i < m_; ++i) {
    const auto k = static_cast<std::size_t>(n_ + i);
    lo_[k] = -row_hi[static_cast<std::size_t>(i)];
    hi_[k] = -row_lo[static_cast<std::size_t>(i)];
    basis_.push_back(n_ + i);
  }
  d_ = cost_;
  xb_.assign(static_cast<std::size_t>(m_), 0.0);
}

double DualSimplex::value(int j) const {
  const auto k = static_cast<std::size_t>(j);
  return state_[k] == VarState::AtUpper ? hi_[k] : lo_[k];
}

void DualSimplex::compute_basic_values() {
  for (int i = 0; i < m_; ++i) {
    double s = 0;
    for (int j = 0; j < ncols_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == VarState::Basic) continue;
      const double coef = t(i, j);
      if (coef != 0.0) s -= coef * value(j);
    }
    xb_[static_cast<std::size_t>(i)] = s;
  }
}

void DualSimplex::pivot(int r, int q) {
  const double piv = t(r, q);
  for (int j = 0; j < ncols_; ++j) t(r, j) /= piv;
  t(r, q) = 1.0;
  for (int i = 0; i < m_; ++i) {
    if (i == r) continue;
    const double f = t(i, q);
    if (f == 0.0) continue;
    for (int j = 0; j < ncols_; ++j) t(i, j) -= f * t(r, j);
    t(i, q) = 0.0;
  }
  const double dq = d_[static_cast<std::size_t>(q)];
  if (dq != 0.0) {
    for (int j = 0; j < ncols_; ++j) d_[static_cast<std::size_t>(j)] -= dq * t(r, j);
  }
  d_[static_cast<std::size_t>(q)] = 0.0;
  basis_[static_cast<std::size_t>(r)] = q;
  state_[static_cast<std::size_t>(q)] = VarState::Basic;
  ++pivots_since_refactor_;
}

void DualSimplex::refactor() {
  Eigen::MatrixXd full(m_, ncols_);
  full.setZero();
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < n_; ++j) {
      full(i, j) = a_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                      static_cast<std::size_t>(j)];
    }
    full(i, n_ + i) = 1.0;
  }
  Eigen::MatrixXd b(m_, m_);
  Eigen::VectorXd cb(m_);
  for (int i = 0; i < m_; ++i) {
    b.col(i) = full.col(basis_[static_cast<std::size_t>(i)]);
    cb(i) = cost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  const Eigen::MatrixXd tab = lu.solve(full);
  if (!tab.allFinite()) throw SolverError("simplex: singular basis on refactor");
  const Eigen::RowVectorXd y = cb.transpose() * tab;
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < ncols_; ++j) t(i, j) = tab(i, j);
  }
  for (int j = 0; j < ncols_; ++j) {
    d_[static_cast<std::size_t>(j)] =
        state_[static_cast<std::size_t>(j)] == VarState::Basic
            ? 0.0
            : cost_[static_cast<std::size_t>(j)] - y(j);
  }
  pivots_since_refactor_ = 0;
}

void DualSimplex::set_bounds(int j, double lo, double hi) {
  lo_[static_cast<std::size_t>(j)] = lo;
  hi_[static_cast<std::size_t>(j)] = hi;
}

DualSimplex::Status DualSimplex::solve() {
  if (pivots_since_refactor_ >= kRefactorEvery) refactor();
  const long cap = 50L * (m_ + ncols_) + 1000;
  for (long it = 0;; ++it) {
    if (it > cap) {
      throw SolverError("simplex: iteration cap reached (" +
                        std::to_string(cap) + " pivots, " +
                        std::to_string(m_) + " rows)");
    }
    compute_basic_values();
    int r = -1;
    double worst = 0;
    bool below = false;
    for (int i = 0; i < m_; ++i) {
      const auto bv = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
      const double x = xb_[static_cast<std::size_t>(i)];
      const double tol = kPrimalTol * (1.0 + std::fabs(x));
      const double under = lo_[bv] - x;
      const double over = x - hi_[bv];
      if (under > tol && under > worst) {
        worst = under;
        r = i;
        below = true;
      } else if (over > tol && over > worst) {
        worst = over;
        r = i;
        below = false;
      }
    }
    if (r < 0) {
      if (pivots_since_refactor_ > 0) {
        refactor();
        compute_basic_values();
        bool clean = true;
        for (int i = 0; i < m_; ++i) {
          const auto bv = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
          const double x = xb_[static_cast<std::size_t>(i)];
          const double tol = kPrimalTol * (1.0 + std::fabs(x));
          if (lo_[bv] - x > tol || x - hi_[bv] > tol) clean = false;
        }
        if (!clean) continue;
      }
      return Status::Optimal;
    }
    int q = -1;
    double best_ratio = kInf;
    double best_alpha = 0;
    for (int j = 0; j < ncols_; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (state_[k] == VarState::Basic || lo_[k] == hi_[k]) continue;
      const double alpha = t(r, j);
      if (std::fabs(alpha) <= kPivotTol) continue;
      const bool at_lower = state_[k] == VarState::AtLower;
      // x_B(r) moves by -alpha * delta_j.
      const bool ok = below ? (at_lower ? alpha < 0 : alpha > 0)
                            : (at_lower ? alpha > 0 : alpha < 0);
      if (!ok) continue;
      const double dj = at_lower ? std::max(0.0, d_[k]) : std::max(0.0, -d_[k]);
      const double ratio = dj / std::fabs(alpha);
      if (ratio < best_ratio - 1e-12 ||
          (ratio <= best_ratio + 1e-12 && std::fabs(alpha) > best_alpha)) {
        best_ratio = ratio;
        best_alpha = std::fabs(alpha);
        q = j;
      }
    }
    if (q < 0) return Status::Infeasible;
    const int leaving = basis_[static_cast<std::size_t>(r)];
    pivot(r, q);
    state_[static_cast<std::size_t>(leaving)] =
        below ? VarState::AtLower : VarState::AtUpper;
    ++iterations_;
  }
}

std::vector<double> DualSimplex::primal() const {
  std::vector<double> x(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    if (state_[static_cast<std::size_t>(j)] != VarState::Basic) {
      x[static_cast<std::size_t>(j)] = value(j);
    }
  }
  for (int i = 0; i < m_; ++i) {
    const int bv = basis_[static_cast<std::size_t>(i)];
    if (bv < n_) x[static_cast<std::size_t>(bv)] = xb_[static_cast<std::size_t>(i)];
  }
  return x;
}

double DualSimplex::objective() const {
  const auto x = primal();
  double z = 0;
  for (int j = 0; j < n_; ++j) {
    z += cost_[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
  }
  return z;
}

}  // namespace fxsynth::detail
