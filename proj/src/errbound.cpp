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

#include "fxsynth/errbound.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fxsynth/error.hpp"

namespace fxsynth::errbound {

namespace {

double max_abs(const Interval& r) { return std::max(std::fabs(r.lo), std::fabs(r.hi)); }

double input_or_constant_bound(const FxNode& node) {
  if (node.kind == NodeKind::Constant && node.real_coeff == 0.0) return 0.0;
  return node.format.lsb();
}

struct Operand {
  int real = -1;
  int fixed = -1;
  double lo = 0, hi = 0;  // integer bounds of the fixed-point variable
};

// Operand bound of each updated-state output node as seen by later nodes
// (its format step), or -1 for nodes that keep their own bound.
std::vector<double> state_operand_bounds(const FxProgram& prog) {
  std::vector<double> seen(prog.nodes.size(), -1.0);
  for (int i = 0; i < prog.n_state && i < static_cast<int>(prog.outputs.size()); ++i) {
    const auto node = static_cast<std::size_t>(prog.outputs[static_cast<std::size_t>(i)].node);
    if (prog.nodes[node].kind != NodeKind::Input) seen[node] = prog.nodes[node].format.lsb();
  }
  return seen;
}

// Distinct operand of a node: weight of its integer in tmp and of its real
// value in the real result.
struct Term {
  int src = 0;
  double w = 0;
  double real_w = 0;
};

std::vector<Term> node_terms(const FxNode& n) {
  switch (n.kind) {
    case NodeKind::ConstMul:
      return {{n.operands[0], static_cast<double>(n.quantized_coeff), n.real_coeff}};
    case NodeKind::Add:
    case NodeKind::Sub: {
      const double sign = n.kind == NodeKind::Sub ? -1.0 : 1.0;
      const double w0 = std::ldexp(1.0, n.align[0]);
      const double w1 = sign * std::ldexp(1.0, n.align[1]);
      if (n.operands[0] == n.operands[1]) return {{n.operands[0], w0 + w1, 1.0 + sign}};
      return {{n.operands[0], w0, 1.0}, {n.operands[1], w1, sign}};
    }
    case NodeKind::ShiftAlign:
      return {{n.operands[0], 1.0, 1.0}};
    default:
      return {};
  }
}

// Values the remainder of |tmp| by 2^shift can take: offset + d * j.
struct RemainderLattice {
  std::int64_t d = 1;
  std::int64_t off_pos = 0;  // tmp >= 0
  std::int64_t off_neg = 0;  // tmp < 0
};

// tmp lies in C + gZ (C from constant operands), so its remainder is fixed
// modulo gcd(g, 2^shift).
RemainderLattice remainder_lattice(const FxProgram& prog, const std::vector<Term>& terms,
                                   int shift) {
  RemainderLattice lat;
  if (shift <= 0 || shift > 62) return lat;
  std::int64_t g = 0;
  __int128 c = 0;
  for (const Term& t : terms) {
    const FxNode& b = prog.nodes[static_cast<std::size_t>(t.src)];
    const auto wi = static_cast<std::int64_t>(t.w);
    if (b.kind == NodeKind::Constant) {
      c += static_cast<__int128>(wi) * b.quantized_coeff;
    } else {
      g = std::gcd(g, wi < 0 ? -wi : wi);
    }
  }
  const std::int64_t pow_s = std::int64_t{1} << shift;
  lat.d = g == 0 ? pow_s : std::gcd(g, pow_s);
  lat.off_pos = static_cast<std::int64_t>(((c % lat.d) + lat.d) % lat.d);
  lat.off_neg = static_cast<std::int64_t>((((-c) % lat.d) + lat.d) % lat.d);
  return lat;
}

}  // namespace

std::vector<OpCase> op_cases(const FxProgram& prog, int node) {
  const FxNode& n = prog.nodes.at(static_cast<std::size_t>(node));
  std::vector<OpCase> cases;
  if (n.shift > 0) {
    for (SignCase s : {SignCase::NonNegative, SignCase::Negative}) {
      for (ErrorSide side : {ErrorSide::Over, ErrorSide::Under}) {
        cases.push_back(OpCase{s, side});
      }
    }
  } else {
    cases.push_back(OpCase{SignCase::None, ErrorSide::Over});
    cases.push_back(OpCase{SignCase::None, ErrorSide::Under});
  }
  return cases;
}

LinearProgram build_op_milp(const FxProgram& prog, int node,
                            const std::vector<double>& node_bounds,
                            const OpCase& op_case) {
  const FxNode& n = prog.nodes.at(static_cast<std::size_t>(node));
  if (n.kind == NodeKind::Input || n.kind == NodeKind::Constant) {
    throw UnsupportedError("build_op_milp: node '" + n.id +
                           "' is not an arithmetic operation");
  }
  if ((n.shift > 0) != (op_case.sign != SignCase::None)) {
    throw Error("build_op_milp: sign case does not match the node's shift");
  }
  LinearProgram lp;
  lp.sense = Sense::Maximize;

  // Operand variables; a repeated operand shares its variables.
  std::vector<Operand> ops;
  std::vector<int> op_of;
  for (std::size_t k = 0; k < n.operands.size(); ++k) {
    const int src = n.operands[k];
    bool reused = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (n.operands[j] == src) {
        op_of.push_back(op_of[j]);
        reused = true;
      }
    }
    if (reused) continue;
    const FxNode& b = prog.nodes[static_cast<std::size_t>(src)];
    const std::string tag = k == 0 ? "b" : "c";
    Operand op;
    if (b.kind == NodeKind::Constant) {
      const double q = static_cast<double>(b.quantized_coeff);
      op.real = lp.add_variable(tag, b.real_coeff, b.real_coeff);
      op.fixed = lp.add_variable(tag + "_hat", q, q, true);
      op.lo = op.hi = q;
    } else {
      op.lo = static_cast<double>(b.format.min_int());
      op.hi = static_cast<double>(b.format.max_int());
      op.real = lp.add_variable(tag, b.range.lo, b.range.hi);
      op.fixed = lp.add_variable(tag + "_hat", op.lo, op.hi, true);
      const double e = node_bounds.at(static_cast<std::size_t>(src));
      const double step = b.format.lsb();
      lp.add_constraint("err_" + tag + "_hi", {{op.real, 1.0}, {op.fixed, -step}},
                        Relation::LessEq, e);
      lp.add_constraint("err_" + tag + "_lo", {{op.real, 1.0}, {op.fixed, -step}},
                        Relation::GreaterEq, -e);
    }
    op_of.push_back(static_cast<int>(ops.size()));
    ops.push_back(op);
  }

  // Real result.
  const int a = lp.add_variable("a", n.range.lo, n.range.hi);
  std::vector<LpTerm> real_def{{a, 1.0}};
  // Integer result before the shift: tmp = sum_k w_k * q_k.
  std::vector<std::pair<int, double>> weights;
  switch (n.kind) {
    case NodeKind::ConstMul:
      real_def.push_back({ops[0].real, -n.real_coeff});
      weights.emplace_back(0, static_cast<double>(n.quantized_coeff));
      break;
    case NodeKind::Add:
    case NodeKind::Sub: {
      const double sign = n.kind == NodeKind::Sub ? -1.0 : 1.0;
      const int o0 = op_of[0];
      const int o1 = op_of[1];
      const double w0 = std::ldexp(1.0, n.align[0]);
      const double w1 = sign * std::ldexp(1.0, n.align[1]);
      if (o0 == o1) {
        real_def.push_back({ops[static_cast<std::size_t>(o0)].real, -(1.0 + sign)});
        weights.emplace_back(o0, w0 + w1);
      } else {
        real_def.push_back({ops[static_cast<std::size_t>(o0)].real, -1.0});
        real_def.push_back({ops[static_cast<std::size_t>(o1)].real, -sign});
        weights.emplace_back(o0, w0);
        weights.emplace_back(o1, w1);
      }
      break;
    }
    case NodeKind::ShiftAlign:
      real_def.push_back({ops[0].real, -1.0});
      weights.emplace_back(0, 1.0);
      break;
    default:
      break;
  }
  lp.add_constraint("real_op", real_def, Relation::Equal, 0.0);

  double tmp_lo = 0, tmp_hi = 0;
  std::vector<LpTerm> tmp_def;
  for (const auto& [o, w] : weights) {
    const Operand& op = ops[static_cast<std::size_t>(o)];
    tmp_lo += std::min(w * op.lo, w * op.hi);
    tmp_hi += std::max(w * op.lo, w * op.hi);
    tmp_def.push_back({op.fixed, -w});
  }
  const int tmp = lp.add_variable("tmp", tmp_lo, tmp_hi, true);
  tmp_def.push_back({tmp, 1.0});
  lp.add_constraint("fixed_op", tmp_def, Relation::Equal, 0.0);

  const double out_step = n.format.lsb();
  int a_hat = -1;
  if (n.shift > 0) {
    const double mag = std::max(std::fabs(tmp_lo), std::fabs(tmp_hi));
    const double pow_s = std::ldexp(1.0, n.shift);
    const double div_hi = std::floor(mag / pow_s);
    const int tmp1 = lp.add_variable("tmp1", 0.0, mag, true);
    const int divisor = lp.add_variable("divisor", 0.0, div_hi, true);
    const int remainder = lp.add_variable("remainder", 0.0, pow_s - 1.0, true);
    a_hat = lp.add_variable("a_hat", -div_hi, div_hi, true);
    if (op_case.sign == SignCase::NonNegative) {
      lp.add_constraint("sign", {{tmp, 1.0}}, Relation::GreaterEq, 0.0);
      lp.add_constraint("magnitude", {{tmp1, 1.0}, {tmp, -1.0}}, Relation::Equal, 0.0);
      lp.add_constraint("result", {{a_hat, 1.0}, {divisor, -1.0}}, Relation::Equal, 0.0);
    } else {
      lp.add_constraint("sign", {{tmp, 1.0}}, Relation::LessEq, -1.0);
      lp.add_constraint("magnitude", {{tmp1, 1.0}, {tmp, 1.0}}, Relation::Equal, 0.0);
      lp.add_constraint("result", {{a_hat, 1.0}, {divisor, 1.0}}, Relation::Equal, 0.0);
    }
    lp.add_constraint("division",
                      {{tmp1, 1.0}, {divisor, -pow_s}, {remainder, -1.0}},
                      Relation::Equal, 0.0);
    // Without this cut the relaxation of an exact operation is translation
    // invariant and branching walks the whole operand range.
    const RemainderLattice lat = remainder_lattice(prog, node_terms(n), n.shift);
    if (lat.d > 1) {
      const std::int64_t offset =
          op_case.sign == SignCase::Negative ? lat.off_neg : lat.off_pos;
      const std::int64_t pow_si = std::int64_t{1} << n.shift;
      const auto q_hi = static_cast<double>((pow_si - 1 - offset) / lat.d);
      const int rem_q = lp.add_variable("rem_q", 0.0, q_hi, true);
      lp.add_constraint("rem_lattice",
                        {{remainder, 1.0}, {rem_q, -static_cast<double>(lat.d)}},
                        Relation::Equal, static_cast<double>(offset));
    }
  } else {
    const double scale = std::ldexp(1.0, -n.shift);
    a_hat = lp.add_variable("a_hat", tmp_lo * scale, tmp_hi * scale, true);
    lp.add_constraint("result", {{a_hat, 1.0}, {tmp, -scale}}, Relation::Equal, 0.0);
  }
  if (op_case.side == ErrorSide::Over) {
    lp.objective = {{a, 1.0}, {a_hat, -out_step}};
  } else {
    lp.objective = {{a, -1.0}, {a_hat, out_step}};
  }
  return lp;
}

bool milp_well_posed(const FxProgram& prog, int node) {
  const FxNode& n = prog.nodes.at(static_cast<std::size_t>(node));
  double tmp_mag = 0;
  double mag = std::max({1.0, std::fabs(n.range.lo), std::fabs(n.range.hi)});
  double finest = n.format.lsb();
  for (const Term& t : node_terms(n)) {
    const FxNode& b = prog.nodes[static_cast<std::size_t>(t.src)];
    const double q_max =
        b.kind == NodeKind::Constant
            ? std::fabs(static_cast<double>(b.quantized_coeff))
            : std::max(std::fabs(static_cast<double>(b.format.min_int())),
                       static_cast<double>(b.format.max_int()));
    tmp_mag += std::fabs(t.w) * q_max;
    mag = std::max({mag, std::fabs(b.range.lo), std::fabs(b.range.hi)});
    if (b.kind != NodeKind::Constant) finest = std::min(finest, b.format.lsb());
  }
  return tmp_mag <= 0x1p40 && finest >= 0x1p-24 * mag;
}

double decoupled_bound(const FxProgram& prog, int node,
                       const std::vector<double>& node_bounds) {
  const FxNode& n = prog.nodes.at(static_cast<std::size_t>(node));
  if (n.kind == NodeKind::Input || n.kind == NodeKind::Constant) {
    return input_or_constant_bound(n);
  }
  const double lsb = n.format.lsb();
  // Real value of one unit of tmp.
  const double unit = std::ldexp(lsb, -n.shift);
  const std::vector<Term> terms = node_terms(n);
  double lo = 0, hi = 0;
  for (const Term& t : terms) {
    const FxNode& b = prog.nodes[static_cast<std::size_t>(t.src)];
    const double step = b.format.lsb();
    // Weight the fixed-point path gives the operand's real value.
    const double w_hat = t.w * unit / step;
    if (b.kind == NodeKind::Constant) {
      const double v = t.real_w * b.real_coeff -
                       w_hat * step * static_cast<double>(b.quantized_coeff);
      lo += v;
      hi += v;
      continue;
    }
    const double dw = t.real_w - w_hat;
    lo += std::min(dw * b.range.lo, dw * b.range.hi);
    hi += std::max(dw * b.range.lo, dw * b.range.hi);
    const double e = std::fabs(w_hat) * node_bounds.at(static_cast<std::size_t>(t.src));
    lo -= e;
    hi += e;
  }
  if (n.shift > 0) {
    // Largest remainder is 2^s - d + offset, in units of 2^-s * lsb.
    const RemainderLattice lat = remainder_lattice(prog, terms, n.shift);
    hi += lsb - static_cast<double>(lat.d - lat.off_pos) * unit;
    lo -= lsb - static_cast<double>(lat.d - lat.off_neg) * unit;
  }
  return std::max(std::fabs(lo), std::fabs(hi));
}

ErrorBound bound_node_error(const FxProgram& prog, int node,
                            const std::vector<double>& node_bounds,
                            const MilpOptions& options) {
  const FxNode& n = prog.nodes.at(static_cast<std::size_t>(node));
  ErrorBound eb;
  eb.node = n.id;
  if (n.kind == NodeKind::Input || n.kind == NodeKind::Constant) {
    eb.bound = input_or_constant_bound(n);
    return eb;
  }
  if (!milp_well_posed(prog, node)) {
    eb.bound = decoupled_bound(prog, node, node_bounds);
    eb.exact = false;
    eb.decoupled = true;
    return eb;
  }
  const auto cases = op_cases(prog, node);
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const LinearProgram lp = build_op_milp(prog, node, node_bounds, cases[c]);
    const MilpResult r = solve_milp(lp, options);
    eb.milp_nodes += r.nodes;
    if (r.status == SolveStatus::Infeasible) continue;
    if (r.status == SolveStatus::NodeLimit) eb.exact = false;
    if (eb.certificate_case < 0 || r.bound > eb.bound) {
      eb.bound = std::max(0.0, r.bound);
      eb.certificate = r.assignment;
      eb.certificate_case = static_cast<int>(c);
    }
  }
  return eb;
}

double ProgramBounds::group_norm(std::size_t first, std::size_t count) const {
  double s = 0;
  for (std::size_t i = first; i < first + count && i < outputs.size(); ++i) {
    s += outputs[i] * outputs[i];
  }
  return std::sqrt(s);
}

ProgramBounds bound_program_error(const FxProgram& prog,
                                  const MilpOptions& options) {
  ProgramBounds pb;
  std::vector<double> bounds(prog.nodes.size(), 0.0);
  // Controls read the stored updated state, a state variable like any other.
  const auto seen_as = state_operand_bounds(prog);
  std::vector<double> operand(prog.nodes.size(), 0.0);
  for (std::size_t i = 0; i < prog.nodes.size(); ++i) {
    ErrorBound eb = bound_node_error(prog, static_cast<int>(i), operand, options);
    bounds[i] = eb.bound;
    operand[i] = seen_as[i] >= 0 ? seen_as[i] : eb.bound;
    pb.exact = pb.exact && eb.exact;
    pb.nodes.push_back(std::move(eb));
  }
  for (const FxOutput& out : prog.outputs) {
    pb.outputs.push_back(bounds[static_cast<std::size_t>(out.node)]);
  }
  pb.b_e2 = pb.group_norm(0, pb.outputs.size());
  return pb;
}

EnumerationResult enumerate_oracle(const FxProgram& prog,
                                   std::uint64_t max_states) {
  struct Lattice {
    std::int64_t first = 0, last = 0;
    double lo = 0, hi = 0, step = 0;
  };
  std::vector<Lattice> lat;
  std::uint64_t states = 1;
  for (int idx : prog.inputs) {
    const FxNode& in = prog.nodes[static_cast<std::size_t>(idx)];
    Lattice l;
    l.lo = in.range.lo;
    l.hi = in.range.hi;
    l.step = in.format.lsb();
    // Cells [q - 1, q + 1] * step that meet the box.
    l.first = std::max<std::int64_t>(
        in.format.min_int(),
        static_cast<std::int64_t>(std::ceil(l.lo / l.step)) - 1);
    l.last = std::min<std::int64_t>(
        in.format.max_int(),
        static_cast<std::int64_t>(std::floor(l.hi / l.step)) + 1);
    while (l.first <= l.last && (l.first + 1) * l.step < l.lo) ++l.first;
    while (l.first <= l.last && (l.last - 1) * l.step > l.hi) --l.last;
    if (l.first > l.last) throw Error("enumerate_oracle: empty input lattice");
    const auto count = static_cast<std::uint64_t>(l.last - l.first + 1);
    if (states > max_states / count) {
      throw Error("enumerate_oracle: more than " + std::to_string(max_states) +
                  " input states");
    }
    states *= count;
    lat.push_back(l);
  }
  const auto forms = affine_forms(prog);
  EnumerationResult res;
  res.states = states;
  res.node_max.assign(prog.nodes.size(), 0.0);
  std::vector<std::int64_t> q(lat.size());
  std::vector<double> cell_lo(lat.size()), cell_hi(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) q[i] = lat[i].first;
  for (std::uint64_t s = 0; s < states; ++s) {
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const double c = static_cast<double>(q[i]) * lat[i].step;
      cell_lo[i] = std::max(lat[i].lo, c - lat[i].step);
      cell_hi[i] = std::min(lat[i].hi, c + lat[i].step);
    }
    EvalResult ev;
    bool overflow = false;
    try {
      ev = eval_fx(prog, q);
    } catch (const OverflowFault&) {
      overflow = true;
    }
    for (std::size_t k = 0; !overflow && k < prog.nodes.size(); ++k) {
      const AffineForm& f = forms[k];
      double lo = f.constant, hi = f.constant;
      for (std::size_t i = 0; i < lat.size(); ++i) {
        const double a = f.coeffs[i];
        lo += std::min(a * cell_lo[i], a * cell_hi[i]);
        hi += std::max(a * cell_lo[i], a * cell_hi[i]);
      }
      const double fx = to_real(ev.nodes[k], prog.nodes[k].format.m);
      res.node_max[k] = std::max({res.node_max[k], hi - fx, fx - lo});
    }
    res.overflowed += overflow;
    for (std::size_t i = 0; i < lat.size(); ++i) {
      if (++q[i] <= lat[i].last) break;
      q[i] = lat[i].first;
    }
  }
  for (const FxOutput& out : prog.outputs) {
    res.output_max.push_back(res.node_max[static_cast<std::size_t>(out.node)]);
  }
  return res;
}

std::vector<double> affine_error_bounds(const FxProgram& prog) {
  std::vector<double> own(prog.nodes.size(), 0.0);
  std::vector<double> e(prog.nodes.size(), 0.0);
  const auto seen_as = state_operand_bounds(prog);
  for (std::size_t i = 0; i < prog.nodes.size(); ++i) {
    const FxNode& n = prog.nodes[i];
    const double trunc = n.shift > 0 ? n.format.lsb() : 0.0;
    auto opb = [&](std::size_t k) { return e[static_cast<std::size_t>(n.operands[k])]; };
    switch (n.kind) {
      case NodeKind::Input:
      case NodeKind::Constant:
        e[i] = input_or_constant_bound(n);
        break;
      case NodeKind::ConstMul: {
        const FxNode& b = prog.nodes[static_cast<std::size_t>(n.operands[0])];
        const double kq = std::ldexp(static_cast<double>(n.quantized_coeff), -n.coeff_shift);
        e[i] = std::fabs(n.real_coeff - kq) * max_abs(b.range) + std::fabs(kq) * opb(0) + trunc;
        break;
      }
      case NodeKind::Add:
      case NodeKind::Sub:
        e[i] = (n.operands[0] == n.operands[1] ? 2.0 * opb(0) : opb(0) + opb(1)) + trunc;
        break;
      case NodeKind::ShiftAlign:
        e[i] = opb(0) + trunc;
        break;
    }
    own[i] = e[i];
    if (seen_as[i] >= 0) e[i] = seen_as[i];
  }
  return own;
}

}  // namespace fxsynth::errbound
