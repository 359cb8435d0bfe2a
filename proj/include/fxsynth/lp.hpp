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

#include <string>
#include <vector>

namespace fxsynth {

struct LpVariable {
  std::string name;
  double lower = 0;
  double upper = 0;
  bool integer = false;
};

struct LpTerm {
  int var = 0;
  double coeff = 0;
};

enum class Relation { LessEq, GreaterEq, Equal };
enum class Sense { Maximize, Minimize };

struct LpConstraint {
  std::string name;
  std::vector<LpTerm> terms;
  Relation relation = Relation::LessEq;
  double rhs = 0;
};

// Every variable must carry finite bounds.
struct LinearProgram {
  std::vector<LpVariable> variables;
  std::vector<LpConstraint> constraints;
  std::vector<LpTerm> objective;
  Sense sense = Sense::Maximize;

  int add_variable(std::string name, double lower, double upper,
                   bool integer = false);
  void add_constraint(std::string name, std::vector<LpTerm> terms,
                      Relation relation, double rhs);
  int find(const std::string& name) const;  // -1 when absent
  // Throws on non-finite data, unknown variables or open bounds.
  void validate() const;
  double evaluate(const std::vector<double>& x) const;
};

enum class SolveStatus { Optimal, Infeasible, NodeLimit };

struct MilpOptions {
  int node_limit = 10000;
  double integrality_tol = 1e-6;
  double gap_abs = 1e-12;
  bool relax_integrality = false;
};

struct MilpResult {
  SolveStatus status = SolveStatus::Infeasible;
  // Best integer-feasible objective found (undefined when none).
  double objective = 0;
  // Proven bound in the optimization direction (upper bound for maximize).
  double bound = 0;
  std::vector<double> assignment;
  int nodes = 0;
  int lp_iterations = 0;
  bool has_solution = false;
};

MilpResult solve_milp(const LinearProgram& lp, const MilpOptions& options = {});

// LP relaxation only.
MilpResult solve_lp(const LinearProgram& lp);

// CPLEX-style LP file text for cross-checking with external solvers.
std::string to_lp_format(const LinearProgram& lp);

}  // namespace fxsynth
