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

#include <cstdint>
#include <vector>

namespace fxsynth::detail {

// Dense bounded-variable dual simplex for
//   minimize c^T x  s.t.  row_lo <= A x <= row_hi,  lo <= x <= hi,
// with every structural bound finite. Starting from the slack basis with each
// structural at the bound favoured by its cost keeps the basis dual feasible,
// so no phase one is needed and bound changes (branching) warm start.
class DualSimplex {
 public:
  enum class Status { Optimal, Infeasible };

  DualSimplex(int rows, int cols, const std::vector<double>& a_rowmajor,
              const std::vector<double>& cost, const std::vector<double>& lo,
              const std::vector<double>& hi, const std::vector<double>& row_lo,
              const std::vector<double>& row_hi);

  Status solve();
  // Changes a structural bound; the basis stays dual feasible.
  void set_bounds(int j, double lo, double hi);
  double lower(int j) const { return lo_[static_cast<std::size_t>(j)]; }
  double upper(int j) const { return hi_[static_cast<std::size_t>(j)]; }

  std::vector<double> primal() const;  // structural values
  double objective() const;
  long iterations() const { return iterations_; }

 private:
  enum class VarState : std::uint8_t { Basic, AtLower, AtUpper };

  double& t(int i, int j) {
    return tab_[static_cast<std::size_t>(i) * static_cast<std::size_t>(ncols_) +
                static_cast<std::size_t>(j)];
  }
  double t(int i, int j) const {
    return tab_[static_cast<std::size_t>(i) * static_cast<std::size_t>(ncols_) +
                static_cast<std::size_t>(j)];
  }
  double value(int j) const;
  void compute_basic_values();
  void pivot(int r, int q);
  void refactor();

  int m_ = 0;      // rows
  int n_ = 0;      // structurals
  int ncols_ = 0;  // structurals + logicals
  std::vector<double> a_;  // original rows, row-major m x n
  std::vector<double> tab_;
  std::vector<double> cost_;
  std::vector<double> d_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<int> basis_;
  std::vector<VarState> state_;
  std::vector<double> xb_;
  long iterations_ = 0;
  int pivots_since_refactor_ = 0;
};

}  // namespace fxsynth::detail
