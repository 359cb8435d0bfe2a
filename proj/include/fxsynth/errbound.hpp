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
#include <string>
#include <vector>

#include "fxsynth/fxprogram.hpp"
#include "fxsynth/lp.hpp"

namespace fxsynth {

struct ErrorBound {
  std::string node;
  double bound = 0;
  // Assignment of the MILP case attaining the bound (empty for input and
  // constant nodes, whose bound is the format step).
  std::vector<double> certificate;
  int certificate_case = -1;
  // False when a node cap stopped a MILP early; the bound is then the best
  // proven upper bound rather than an attained maximum.
  bool exact = true;
  int milp_nodes = 0;
  // Set when the node was too wide for the floating-point MILP and the bound
  // comes from the decoupled sum of its error terms (sound, not attained).
  bool decoupled = false;
};

namespace errbound {

// Sign of the integer product/sum before the truncating shift.
enum class SignCase { NonNegative, Negative, None };
// Direction of the error being maximized: a - a_hat or a_hat - a.
enum class ErrorSide { Over, Under };

struct OpCase {
  SignCase sign = SignCase::None;
  ErrorSide side = ErrorSide::Over;
};

// Cases for a node: 4 when the result is shifted right, 2 otherwise.
std::vector<OpCase> op_cases(const FxProgram& prog, int node);

// MILP for one node and case. Operand bounds are indexed by node.
LinearProgram build_op_milp(const FxProgram& prog, int node,
                            const std::vector<double>& node_bounds,
                            const OpCase& op_case);

// Whether the node's MILP stays within what double-precision simplex can
// resolve: integer magnitudes up to 2^40 and error steps no finer than 2^-24
// of the largest real magnitude involved.
bool milp_well_posed(const FxProgram& prog, int node);

// max |a - a_hat| bounded by coefficient error + propagated operand error +
// largest truncation remainder, each maximized independently.
double decoupled_bound(const FxProgram& prog, int node,
                       const std::vector<double>& node_bounds);

// MILP when well posed, the decoupled bound otherwise.
ErrorBound bound_node_error(const FxProgram& prog, int node,
                            const std::vector<double>& node_bounds,
                            const MilpOptions& options = {});

struct ProgramBounds {
  std::vector<ErrorBound> nodes;
  std::vector<double> outputs;  // bound of each program output
  double b_e2 = 0;              // Euclidean norm of `outputs`
  bool exact = true;

  // Norm over outputs [first, first + count).
  double group_norm(std::size_t first, std::size_t count) const;
};

// Bounds in topological order. For controller programs, nodes reading an
// updated-state output see it as a stored state variable (bound 2^-m); the
// output itself keeps its propagated bound.
ProgramBounds bound_program_error(const FxProgram& prog,
                                  const MilpOptions& options = {});

struct EnumerationResult {
  std::vector<double> node_max;    // exact max |real - fixed| per node
  std::vector<double> output_max;  // per output
  std::uint64_t states = 0;
  std::uint64_t overflowed = 0;  // edge cells whose fixed result leaves a format
};

// Exhaustive search over the integer input lattice, with worst real inputs
// in each quantization cell. Throws Error if the lattice exceeds max_states.
// Cells where the fixed-point evaluation overflows are skipped and counted.
EnumerationResult enumerate_oracle(const FxProgram& prog,
                                   std::uint64_t max_states);

// Per-node bound composed with interval reasoning only, with the same
// updated-state convention as bound_program_error.
std::vector<double> affine_error_bounds(const FxProgram& prog);

}  // namespace errbound
}  // namespace fxsynth
