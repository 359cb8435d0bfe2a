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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fxsynth/fxformat.hpp"
#include "fxsynth/plant.hpp"

namespace fxsynth {

enum class NodeKind { Input, Constant, Add, Sub, ConstMul, ShiftAlign };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view name);

struct FxNode {
  std::string id;
  NodeKind kind = NodeKind::Input;
  std::vector<int> operands;
  // const_mul: the real coefficient; constant: the real value.
  double real_coeff = 0;
  // const_mul: trunc(real_coeff * 2^coeff_shift); constant: the value at m.
  std::int64_t quantized_coeff = 0;
  int coeff_shift = 0;
  FxFormat format;
  Interval range;
  // Right shift applied to the integer result (negative means left shift).
  int shift = 0;
  // add/sub: left shift applied to each operand before combining.
  std::array<int, 2> align{0, 0};
};

struct FxOutput {
  std::string name;
  int node = 0;
  bool negate = false;
};

struct FxProgram {
  std::vector<FxNode> nodes;
  std::vector<int> inputs;  // node indices of Input nodes, in order
  std::vector<FxOutput> outputs;
  int bit_budget = 16;
  int coeff_bits = 16;
  // Controller layout: inputs are n_state states then measurements; outputs
  // are n_state updated states then controls. Zero for free-form programs.
  int n_state = 0;
  int n_meas = 0;

  int find(std::string_view id) const;  // -1 when absent
  const FxNode& node(std::string_view id) const;
};

class FxProgramBuilder {
 public:
  explicit FxProgramBuilder(int bit_budget, int coeff_bits = 0);

  int input(std::string id, Interval range);
  int input(std::string id, Interval range, FxFormat format);
  int constant(std::string id, double value,
               std::optional<FxFormat> format = std::nullopt);
  int const_mul(std::string id, int operand, double coeff,
                std::optional<FxFormat> format = std::nullopt);
  int add(std::string id, int lhs, int rhs,
          std::optional<FxFormat> format = std::nullopt);
  int sub(std::string id, int lhs, int rhs,
          std::optional<FxFormat> format = std::nullopt);
  int shift_align(std::string id, int operand, FxFormat format);
  void output(std::string name, int node, bool negate = false);

  // Real-arithmetic range of a node built so far.
  const Interval& range(int node) const;
  const FxFormat& format(int node) const;
  // Exact range of sum_j coeff_j * node_j over the input box.
  Interval linear_range(const std::vector<std::pair<int, double>>& terms) const;

  FxProgram build();

 private:
  int push(FxNode node, std::vector<double> affine, double constant);
  FxFormat pick_format(const Interval& range,
                       const std::optional<FxFormat>& forced) const;
  int add_or_sub(NodeKind kind, std::string id, int lhs, int rhs,
                 std::optional<FxFormat> format);
  void check_operand(int node) const;

  FxProgram prog_;
  std::vector<std::vector<double>> affine_;
  std::vector<double> affine_const_;
  std::vector<Interval> input_ranges_;
};

// A node's value as c + sum_i coeffs[i] * input_i (inputs in program order).
struct AffineForm {
  double constant = 0;
  std::vector<double> coeffs;
};

std::vector<AffineForm> affine_forms(const FxProgram& prog);

// Exact real range of every node over the input box.
std::vector<Interval> range_analysis(const FxProgram& prog);

// Checks structure, formats, coefficients, shifts and stored ranges.
void validate_program(const FxProgram& prog);

struct EvalResult {
  std::vector<std::int64_t> nodes;    // value of every node
  std::vector<std::int64_t> outputs;  // value of each output's node
};

// Bit-exact integer evaluation. Throws OverflowFault naming the first node
// whose value leaves its format.
EvalResult eval_fx(const FxProgram& prog,
                   const std::vector<std::int64_t>& inputs);

// Real value of output i, including its negate flag.
double output_real(const FxProgram& prog, const EvalResult& result,
                   std::size_t i);

// Observer update x_hat' = (A - BK - LC) x_hat + L y and u = -K x_hat'.
FxProgram synthesize_controller_program(const DiscretePlant& dp,
                                        const GainPair& gains,
                                        const std::vector<Interval>& y_box,
                                        const std::vector<Interval>& xhat_box,
                                        int bits, int coeff_bits = 0);

// PID update x_hat' = A_hat x_hat + B_hat u_hat, y_hat = C_hat x_hat + D_hat
// u_hat.
FxProgram synthesize_pid_program(const PidRealization& pid,
                                 const std::vector<Interval>& xhat_box,
                                 const Interval& uhat_box, int bits,
                                 int coeff_bits = 0);

std::string program_to_json(const FxProgram& prog);
FxProgram program_from_json(std::string_view text);

}  // namespace fxsynth
