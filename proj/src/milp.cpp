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
#include <cstdio>
#include <cctype>
#include <limits>
#include <memory>
#include <queue>
#include <sstream>

#include "fxsynth/error.hpp"
#include "fxsynth/lp.hpp"
#include "simplex.hpp"

namespace fxsynth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Beyond this scale a double LP solution cannot resolve integrality.
constexpr double kMaxBranchScale = 0x1p40;

double pow2_ceil(double v) {
  if (v <= 0 || !std::isfinite(v)) return 1.0;
  int e = 0;
  std::frexp(v, &e);  // v = f * 2^e, f in [0.5, 1)
  return std::ldexp(1.0, e);
}

double pow2_near(double v) {
  if (v <= 0 || !std::isfinite(v)) return 1.0;
  return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(v))));
}

// Scaled copy of a LinearProgram in minimization form.
struct ScaledModel {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;
  std::vector<double> cost;
  std::vector<double> lo, hi, row_lo, row_hi;
  std::vector<double> col_scale;  // x = col_scale * x'
  double obj_scale = 1;           // internal = obj_scale * (+/- original)
  double sign = 1;                // +1 minimize, -1 maximize
};

ScaledModel scale_model(const LinearProgram& lp) {
  ScaledModel s;
  s.rows = static_cast<int>(lp.constraints.size());
  s.cols = static_cast<int>(lp.variables.size());
  s.sign = lp.sense == Sense::Minimize ? 1.0 : -1.0;
  s.col_scale.resize(static_cast<std::size_t>(s.cols));
  for (int j = 0; j < s.cols; ++j) {
    const LpVariable& v = lp.variables[static_cast<std::size_t>(j)];
    const double mag = std::max(std::fabs(v.lower), std::fabs(v.upper));
    s.col_scale[static_cast<std::size_t>(j)] = mag > 0 ? pow2_ceil(mag) : 1.0;
    s.lo.push_back(v.lower / s.col_scale[static_cast<std::size_t>(j)]);
    s.hi.push_back(v.upper / s.col_scale[static_cast<std::size_t>(j)]);
  }
  s.a.assign(static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols), 0.0);
  for (int i = 0; i < s.rows; ++i) {
    const LpConstraint& c = lp.constraints[static_cast<std::size_t>(i)];
    double* row = &s.a[static_cast<std::size_t>(i) * static_cast<std::size_t>(s.cols)];
    for (const LpTerm& t : c.terms) {
      row[t.var] += t.coeff * s.col_scale[static_cast<std::size_t>(t.var)];
    }
    double mag = 0;
    for (int j = 0; j < s.cols; ++j) mag = std::max(mag, std::fabs(row[j]));
    const double rs = mag > 0 ? 1.0 / pow2_near(mag) : 1.0;
    for (int j = 0; j < s.cols; ++j) row[j] *= rs;
    const double rhs = c.rhs * rs;
    s.row_lo.push_back(c.relation == Relation::LessEq ? -kInf : rhs);
    s.row_hi.push_back(c.relation == Relation::GreaterEq ? kInf : rhs);
  }
  s.cost.assign(static_cast<std::size_t>(s.cols), 0.0);
  for (const LpTerm& t : lp.objective) {
    s.cost[static_cast<std::size_t>(t.var)] +=
        s.sign * t.coeff * s.col_scale[static_cast<std::size_t>(t.var)];
  }
  double mag = 0;
  for (double c : s.cost) mag = std::max(mag, std::fabs(c));
  s.obj_scale = mag > 0 ? 1.0 / pow2_near(mag) : 1.0;
  for (double& c : s.cost) c *= s.obj_scale;
  return s;
}

struct Node {
  detail::DualSimplex lp;
  double bound;  // internal (scaled, minimization) objective
  long id;
};

struct NodeOrder {
  bool operator()(const Node* x, const Node* y) const {
    if (x->bound != y->bound) return x->bound > y->bound;
    return x->id > y->id;
  }
};

}  // namespace

int LinearProgram::add_variable(std::string name, double lower, double upper,
                                bool integer) {
  variables.push_back(LpVariable{std::move(name), lower, upper, integer});
  return static_cast<int>(variables.size()) - 1;
}

void LinearProgram::add_constraint(std::string name, std::vector<LpTerm> terms,
                                   Relation relation, double rhs) {
  constraints.push_back(LpConstraint{std::move(name), std::move(terms), relation, rhs});
}

int LinearProgram::find(const std::string& name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

void LinearProgram::validate() const {
  const auto nv = static_cast<int>(variables.size());
  for (const LpVariable& v : variables) {
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
      throw Error("LP variable '" + v.name + "' needs finite bounds");
    }
    if (v.lower > v.upper) {
      throw Error("LP variable '" + v.name + "' has empty bounds");
    }
  }
  auto check_terms = [nv](const std::vector<LpTerm>& terms, const std::string& where) {
    for (const LpTerm& t : terms) {
      if (t.var < 0 || t.var >= nv) {
        throw Error(where + " references an undeclared variable");
      }
      if (!std::isfinite(t.coeff)) throw Error(where + " has a non-finite coefficient");
    }
  };
  for (const LpConstraint& c : constraints) {
    check_terms(c.terms, "constraint '" + c.name + "'");
    if (!std::isfinite(c.rhs)) throw Error("constraint '" + c.name + "' has non-finite rhs");
  }
  check_terms(objective, "objective");
}

double LinearProgram::evaluate(const std::vector<double>& x) const {
  double z = 0;
  for (const LpTerm& t : objective) z += t.coeff * x.at(static_cast<std::size_t>(t.var));
  return z;
}

MilpResult solve_milp(const LinearProgram& lp, const MilpOptions& options) {
  lp.validate();
  MilpResult result;
  const ScaledModel s = scale_model(lp);
  // Internal objective -> original objective.
  auto to_original = [&s](double internal) { return internal / s.obj_scale * s.sign; };
  const double gap = options.gap_abs * s.obj_scale;

  std::vector<int> branchable;
  if (!options.relax_integrality) {
    for (int j = 0; j < s.cols; ++j) {
      if (lp.variables[static_cast<std::size_t>(j)].integer &&
          s.col_scale[static_cast<std::size_t>(j)] <= kMaxBranchScale) {
        branchable.push_back(j);
      }
    }
  }

  auto root = std::make_unique<Node>(Node{
      detail::DualSimplex(s.rows, s.cols, s.a, s.cost, s.lo, s.hi, s.row_lo, s.row_hi),
      0.0, 0});
  // Round integer bounds inward so branching works on exact integers.
  for (int j : branchable) {
    const double sc = s.col_scale[static_cast<std::size_t>(j)];
    const LpVariable& v = lp.variables[static_cast<std::size_t>(j)];
    const double lo = std::ceil(v.lower - options.integrality_tol);
    const double hi = std::floor(v.upper + options.integrality_tol);
    if (lo > hi) return result;
    root->lp.set_bounds(j, lo / sc, hi / sc);
  }
  if (root->lp.solve() == detail::DualSimplex::Status::Infeasible) {
    result.lp_iterations = static_cast<int>(root->lp.iterations());
    result.nodes = 1;
    return result;
  }
  root->bound = root->lp.objective();

  std::vector<std::unique_ptr<Node>> storage;
  std::priority_queue<Node*, std::vector<Node*>, NodeOrder> open;
  storage.push_back(std::move(root));
  open.push(storage.back().get());
  long next_id = 1;
  double incumbent = kInf;
  std::vector<double> best_x;
  long iterations = 0;
  int processed = 0;
  bool limited = false;
  double open_bound = kInf;

  while (!open.empty()) {
    Node* node = open.top();
    open.pop();
    if (node->bound >= incumbent - gap) break;
    if (processed >= options.node_limit) {
      limited = true;
      open_bound = node->bound;
      break;
    }
    ++processed;
    const std::vector<double> xs = node->lp.primal();
    int branch = -1;
    double best_frac = options.integrality_tol;
    double branch_value = 0;
    for (int j : branchable) {
      const double x = xs[static_cast<std::size_t>(j)] * s.col_scale[static_cast<std::size_t>(j)];
      const double frac = std::fabs(x - std::round(x));
      if (frac > best_frac) {
        best_frac = frac;
        branch = j;
        branch_value = x;
      }
    }
    if (branch < 0) {
      if (node->bound < incumbent) {
        incumbent = node->bound;
        best_x = xs;
      }
      continue;
    }
    const double sc = s.col_scale[static_cast<std::size_t>(branch)];
    const double lo = node->lp.lower(branch);
    const double hi = node->lp.upper(branch);
    const double down = std::floor(branch_value) / sc;
    const double up = std::ceil(branch_value) / sc;
    for (int side = 0; side < 2; ++side) {
      auto child = std::make_unique<Node>(Node{node->lp, 0.0, next_id++});
      if (side == 0) {
        child->lp.set_bounds(branch, lo, down);
      } else {
        child->lp.set_bounds(branch, up, hi);
      }
      const long before = child->lp.iterations();
      const auto status = child->lp.solve();
      iterations += child->lp.iterations() - before;
      if (status == detail::DualSimplex::Status::Infeasible) continue;
      child->bound = child->lp.objective();
      if (child->bound >= incumbent - gap) continue;
      open.push(child.get());
      storage.push_back(std::move(child));
    }
  }

  result.nodes = processed;
  result.lp_iterations = static_cast<int>(iterations + storage.front()->lp.iterations());
  if (!best_x.empty()) {
    result.has_solution = true;
    result.assignment.resize(best_x.size());
    for (std::size_t j = 0; j < best_x.size(); ++j) {
      double x = best_x[j] * s.col_scale[j];
      if (lp.variables[j].integer && std::fabs(x - std::round(x)) <= options.integrality_tol) {
        x = std::round(x);
      }
      result.assignment[j] = x;
    }
    result.objective = to_original(incumbent);
  }
  if (limited) {
    result.status = SolveStatus::NodeLimit;
    const double best_internal = std::min(incumbent, open_bound);
    result.bound = to_original(best_internal);
  } else if (result.has_solution) {
    result.status = SolveStatus::Optimal;
    result.bound = result.objective;
  } else {
    result.status = SolveStatus::Infeasible;
  }
  return result;
}

MilpResult solve_lp(const LinearProgram& lp) {
  MilpOptions options;
  options.relax_integrality = true;
  return solve_milp(lp, options);
}

std::string to_lp_format(const LinearProgram& lp) {
  lp.validate();
  auto name = [&lp](int j) {
    std::string s = lp.variables[static_cast<std::size_t>(j)].name;
    for (char& ch : s) {
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') ch = '_';
    }
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) {
      s = "x" + std::to_string(j) + "_" + s;
    }
    return s;
  };
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto expr = [&](const std::vector<LpTerm>& terms) {
    std::string out;
    for (const LpTerm& t : terms) {
      out += (t.coeff < 0 ? " - " : " + ") + num(std::fabs(t.coeff)) + " " + name(t.var);
    }
    return out.empty() ? std::string(" 0 ") + name(0) : out;
  };
  std::ostringstream os;
  os << "\\ fxsynth MILP\n";
  os << (lp.sense == Sense::Maximize ? "Maximize\n" : "Minimize\n");
  os << " obj:" << expr(lp.objective) << "\n";
  os << "Subject To\n";
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    const LpConstraint& c = lp.constraints[i];
    const char* rel = c.relation == Relation::LessEq ? "<=" : c.relation == Relation::GreaterEq ? ">=" : "=";
    os << " c" << i << ":" << expr(c.terms) << " " << rel << " " << num(c.rhs) << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    const LpVariable& v = lp.variables[j];
    os << " " << num(v.lower) << " <= " << name(static_cast<int>(j)) << " <= " << num(v.upper) << "\n";
  }
  bool any_int = false;
  for (const LpVariable& v : lp.variables) any_int = any_int || v.integer;
  if (any_int) {
    os << "General\n";
    for (std::size_t j = 0; j < lp.variables.size(); ++j) {
      if (lp.variables[j].integer) os << " " << name(static_cast<int>(j)) << "\n";
    }
  }
  os << "End\n";
  return os.str();
}

}  // namespace fxsynth
