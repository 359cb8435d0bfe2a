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

#include "fxsynth/fxprogram.hpp"

#include <cmath>
#include <utility>

#include "fxsynth/error.hpp"
#include "json.hpp"

namespace fxsynth {

namespace {

using Json = nlohmann::json;

constexpr int kMaxProgramBits = 32;

Interval range_of(const std::vector<double>& coeffs, double constant,
                  const std::vector<Interval>& boxes) {
  double center = constant;
  double spread = 0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    center += coeffs[i] * boxes[i].center();
    spread += std::fabs(coeffs[i]) * boxes[i].halfwidth();
  }
  return Interval{center - spread, center + spread};
}

bool fits_int(__int128 v, const FxFormat& f) {
  return v >= f.min_int() && v <= f.max_int();
}

__int128 apply_shift(__int128 v, int shift) {
  return shift >= 0 ? shift_right_sm(v, shift) : v * (__int128{1} << -shift);
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Input: return "input";
    case NodeKind::Constant: return "constant";
    case NodeKind::Add: return "add";
    case NodeKind::Sub: return "sub";
    case NodeKind::ConstMul: return "const_mul";
    case NodeKind::ShiftAlign: return "shift_align";
  }
  return "?";
}

NodeKind node_kind_from_string(std::string_view name) {
  for (NodeKind k : {NodeKind::Input, NodeKind::Constant, NodeKind::Add,
                     NodeKind::Sub, NodeKind::ConstMul, NodeKind::ShiftAlign}) {
    if (to_string(k) == name) return k;
  }
  throw ParseError("unknown node kind '" + std::string(name) + "'");
}

int FxProgram::find(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const FxNode& FxProgram::node(std::string_view id) const {
  const int i = find(id);
  if (i < 0) throw Error("no node named '" + std::string(id) + "'");
  return nodes[static_cast<std::size_t>(i)];
}

FxProgramBuilder::FxProgramBuilder(int bit_budget, int coeff_bits) {
  if (bit_budget < 2 || bit_budget > kMaxProgramBits) {
    throw UnsupportedError("bit budget must lie in [2, 32]");
  }
  if (coeff_bits == 0) coeff_bits = bit_budget;
  if (coeff_bits < 2 || coeff_bits > kMaxProgramBits) {
    throw UnsupportedError("coefficient width must lie in [2, 32]");
  }
  prog_.bit_budget = bit_budget;
  prog_.coeff_bits = coeff_bits;
}

void FxProgramBuilder::check_operand(int node) const {
  if (node < 0 || node >= static_cast<int>(prog_.nodes.size())) {
    throw Error("operand index out of range");
  }
}

const Interval& FxProgramBuilder::range(int node) const {
  check_operand(node);
  return prog_.nodes[static_cast<std::size_t>(node)].range;
}

const FxFormat& FxProgramBuilder::format(int node) const {
  check_operand(node);
  return prog_.nodes[static_cast<std::size_t>(node)].format;
}

FxFormat FxProgramBuilder::pick_format(
    const Interval& range, const std::optional<FxFormat>& forced) const {
  if (!forced) return allocate_format(range, true, prog_.bit_budget);
  forced->validate();
  if (!forced->holds(range)) {
    throw BudgetExceeded("format " + forced->str() + " cannot hold range [" +
                         std::to_string(range.lo) + ", " +
                         std::to_string(range.hi) + "]");
  }
  return *forced;
}

int FxProgramBuilder::push(FxNode node, std::vector<double> affine,
                           double constant) {
  if (node.id.empty()) throw Error("node id must not be empty");
  if (prog_.find(node.id) >= 0) {
    throw Error("duplicate node id '" + node.id + "'");
  }
  prog_.nodes.push_back(std::move(node));
  affine_.push_back(std::move(affine));
  affine_const_.push_back(constant);
  return static_cast<int>(prog_.nodes.size()) - 1;
}

int FxProgramBuilder::input(std::string id, Interval range) {
  range = Interval::make(range.lo, range.hi);
  return input(std::move(id), range,
               allocate_format(range, true, prog_.bit_budget));
}

int FxProgramBuilder::input(std::string id, Interval range, FxFormat format) {
  range = Interval::make(range.lo, range.hi);
  FxNode node;
  node.id = std::move(id);
  node.kind = NodeKind::Input;
  node.range = range;
  node.format = pick_format(range, format);
  const std::size_t k = input_ranges_.size();
  input_ranges_.push_back(range);
  for (auto& a : affine_) a.push_back(0.0);
  std::vector<double> affine(k + 1, 0.0);
  affine[k] = 1.0;
  const int idx = push(std::move(node), std::move(affine), 0.0);
  prog_.inputs.push_back(idx);
  return idx;
}

int FxProgramBuilder::constant(std::string id, double value,
                               std::optional<FxFormat> format) {
  const Interval range = Interval::make(value, value);
  FxNode node;
  node.id = std::move(id);
  node.kind = NodeKind::Constant;
  node.real_coeff = value;
  node.range = range;
  node.format = pick_format(range, format);
  node.coeff_shift = node.format.m;
  node.quantized_coeff = quantize(value, node.format.m);
  return push(std::move(node), std::vector<double>(input_ranges_.size(), 0.0),
              value);
}

int FxProgramBuilder::const_mul(std::string id, int operand, double coeff,
                                std::optional<FxFormat> format) {
  check_operand(operand);
  if (!std::isfinite(coeff)) throw Error("non-finite coefficient");
  const auto op = static_cast<std::size_t>(operand);
  std::vector<double> affine = affine_[op];
  for (double& a : affine) a *= coeff;
  const double constant = coeff * affine_const_[op];
  FxNode node;
  node.id = std::move(id);
  node.kind = NodeKind::ConstMul;
  node.operands = {operand};
  node.real_coeff = coeff;
  const FxFormat cf =
      allocate_format(Interval{coeff, coeff}, true, prog_.coeff_bits);
  node.coeff_shift = cf.m;
  node.quantized_coeff = quantize(coeff, cf.m);
  node.range = range_of(affine, constant, input_ranges_);
  node.format = pick_format(node.range, format);
  node.shift = prog_.nodes[op].format.m + node.coeff_shift - node.format.m;
  return push(std::move(node), std::move(affine), constant);
}

int FxProgramBuilder::add_or_sub(NodeKind kind, std::string id, int lhs,
                                 int rhs, std::optional<FxFormat> format) {
  check_operand(lhs);
  check_operand(rhs);
  const auto l = static_cast<std::size_t>(lhs);
  const auto r = static_cast<std::size_t>(rhs);
  const double sign = kind == NodeKind::Sub ? -1.0 : 1.0;
  std::vector<double> affine = affine_[l];
  for (std::size_t i = 0; i < affine.size(); ++i) {
    affine[i] += sign * affine_[r][i];
  }
  const double constant = affine_const_[l] + sign * affine_const_[r];
  FxNode node;
  node.id = std::move(id);
  node.kind = kind;
  node.operands = {lhs, rhs};
  node.range = range_of(affine, constant, input_ranges_);
  node.format = pick_format(node.range, format);
  const int ml = prog_.nodes[l].format.m;
  const int mr = prog_.nodes[r].format.m;
  const int ms = std::max(ml, mr);
  node.align = {ms - ml, ms - mr};
  node.shift = ms - node.format.m;
  return push(std::move(node), std::move(affine), constant);
}

int FxProgramBuilder::add(std::string id, int lhs, int rhs,
                          std::optional<FxFormat> format) {
  return add_or_sub(NodeKind::Add, std::move(id), lhs, rhs, format);
}

int FxProgramBuilder::sub(std::string id, int lhs, int rhs,
                          std::optional<FxFormat> format) {
  return add_or_sub(NodeKind::Sub, std::move(id), lhs, rhs, format);
}

int FxProgramBuilder::shift_align(std::string id, int operand,
                                  FxFormat format) {
  check_operand(operand);
  const auto op = static_cast<std::size_t>(operand);
  FxNode node;
  node.id = std::move(id);
  node.kind = NodeKind::ShiftAlign;
  node.operands = {operand};
  node.range = prog_.nodes[op].range;
  node.format = pick_format(node.range, format);
  node.shift = prog_.nodes[op].format.m - node.format.m;
  return push(std::move(node), affine_[op], affine_const_[op]);
}

void FxProgramBuilder::output(std::string name, int node, bool negate) {
  check_operand(node);
  prog_.outputs.push_back(FxOutput{std::move(name), node, negate});
}

Interval FxProgramBuilder::linear_range(
    const std::vector<std::pair<int, double>>& terms) const {
  std::vector<double> affine(input_ranges_.size(), 0.0);
  double constant = 0;
  for (const auto& [node, coeff] : terms) {
    check_operand(node);
    const auto k = static_cast<std::size_t>(node);
    for (std::size_t i = 0; i < affine.size(); ++i) {
      affine[i] += coeff * affine_[k][i];
    }
    constant += coeff * affine_const_[k];
  }
  return range_of(affine, constant, input_ranges_);
}

FxProgram FxProgramBuilder::build() {
  validate_program(prog_);
  return prog_;
}

std::vector<AffineForm> affine_forms(const FxProgram& prog) {
  const std::size_t k = prog.inputs.size();
  std::vector<AffineForm> forms(prog.nodes.size());
  std::size_t next_input = 0;
  for (std::size_t i = 0; i < prog.nodes.size(); ++i) {
    const FxNode& node = prog.nodes[i];
    AffineForm& f = forms[i];
    f.coeffs.assign(k, 0.0);
    switch (node.kind) {
      case NodeKind::Input:
        f.coeffs[next_input++] = 1.0;
        break;
      case NodeKind::Constant:
        f.constant = node.real_coeff;
        break;
      case NodeKind::ConstMul: {
        const AffineForm& b = forms[static_cast<std::size_t>(node.operands[0])];
        f.constant = node.real_coeff * b.constant;
        for (std::size_t j = 0; j < k; ++j) {
          f.coeffs[j] = node.real_coeff * b.coeffs[j];
        }
        break;
      }
      case NodeKind::Add:
      case NodeKind::Sub: {
        const double sign = node.kind == NodeKind::Sub ? -1.0 : 1.0;
        const AffineForm& b = forms[static_cast<std::size_t>(node.operands[0])];
        const AffineForm& c = forms[static_cast<std::size_t>(node.operands[1])];
        f.constant = b.constant + sign * c.constant;
        for (std::size_t j = 0; j < k; ++j) {
          f.coeffs[j] = b.coeffs[j] + sign * c.coeffs[j];
        }
        break;
      }
      case NodeKind::ShiftAlign:
        f = forms[static_cast<std::size_t>(node.operands[0])];
        break;
    }
  }
  return forms;
}

std::vector<Interval> range_analysis(const FxProgram& prog) {
  std::vector<Interval> boxes;
  for (int idx : prog.inputs) {
    const Interval& r = prog.nodes[static_cast<std::size_t>(idx)].range;
    boxes.push_back(Interval::make(r.lo, r.hi));
  }
  std::vector<Interval> ranges;
  for (const AffineForm& f : affine_forms(prog)) {
    ranges.push_back(range_of(f.coeffs, f.constant, boxes));
  }
  return ranges;
}

void validate_program(const FxProgram& prog) {
  if (prog.bit_budget < 2 || prog.bit_budget > kMaxProgramBits ||
      prog.coeff_bits < 2 || prog.coeff_bits > kMaxProgramBits) {
    throw Error("program bit widths out of range");
  }
  std::size_t seen_inputs = 0;
  for (std::size_t i = 0; i < prog.nodes.size(); ++i) {
    const FxNode& node = prog.nodes[i];
    const std::string where = "node '" + node.id + "': ";
    node.format.validate();
    std::size_t arity = 0;
    switch (node.kind) {
      case NodeKind::Input:
        if (seen_inputs >= prog.inputs.size() ||
            prog.inputs[seen_inputs] != static_cast<int>(i)) {
          throw Error(where + "input list out of order");
        }
        ++seen_inputs;
        break;
      case NodeKind::Constant:
        if (node.quantized_coeff != quantize(node.real_coeff, node.format.m)) {
          throw Error(where + "constant not quantized to its format");
        }
        break;
      case NodeKind::ConstMul:
      case NodeKind::ShiftAlign:
        arity = 1;
        break;
      case NodeKind::Add:
      case NodeKind::Sub:
        arity = 2;
        break;
    }
    if (node.operands.size() != arity) throw Error(where + "wrong arity");
    for (int op : node.operands) {
      if (op < 0 || op >= static_cast<int>(i)) {
        throw Error(where + "operand does not precede node");
      }
    }
    if (node.kind == NodeKind::ConstMul) {
      if (node.quantized_coeff != quantize(node.real_coeff, node.coeff_shift)) {
        throw Error(where + "coefficient not truncated to coeff_shift");
      }
      const FxFormat cf{true, prog.coeff_bits, node.coeff_shift};
      cf.validate();
      if (!cf.fits(node.quantized_coeff)) {
        throw Error(where + "coefficient exceeds coefficient width");
      }
      const int mb = prog.nodes[static_cast<std::size_t>(node.operands[0])].format.m;
      if (node.shift != mb + node.coeff_shift - node.format.m) {
        throw Error(where + "inconsistent shift");
      }
    }
    if (node.kind == NodeKind::Add || node.kind == NodeKind::Sub) {
      const int ml = prog.nodes[static_cast<std::size_t>(node.operands[0])].format.m;
      const int mr = prog.nodes[static_cast<std::size_t>(node.operands[1])].format.m;
      const int ms = std::max(ml, mr);
      if (node.align[0] != ms - ml || node.align[1] != ms - mr ||
          node.shift != ms - node.format.m) {
        throw Error(where + "inconsistent alignment");
      }
    }
    if (node.kind == NodeKind::ShiftAlign &&
        node.shift != prog.nodes[static_cast<std::size_t>(node.operands[0])]
                              .format.m -
                          node.format.m) {
      throw Error(where + "inconsistent shift");
    }
  }
  if (seen_inputs != prog.inputs.size()) throw Error("dangling input index");
  const auto ranges = range_analysis(prog);
  for (std::size_t i = 0; i < prog.nodes.size(); ++i) {
    const FxNode& node = prog.nodes[i];
    const double tol = 1e-9 * (1.0 + std::fabs(ranges[i].lo) +
                               std::fabs(ranges[i].hi));
    if (std::fabs(node.range.lo - ranges[i].lo) > tol ||
        std::fabs(node.range.hi - ranges[i].hi) > tol) {
      throw Error("node '" + node.id + "': stored range disagrees with analysis");
    }
    if (!node.format.holds(node.range)) {
      throw Error("node '" + node.id + "': format cannot hold its range");
    }
  }
  for (const FxOutput& out : prog.outputs) {
    if (out.node < 0 || out.node >= static_cast<int>(prog.nodes.size())) {
      throw Error("output '" + out.name + "' references a missing node");
    }
  }
  if (prog.n_state < 0 || prog.n_meas < 0 ||
      static_cast<std::size_t>(prog.n_state + prog.n_meas) >
          prog.inputs.size()) {
    throw Error("controller layout exceeds input count");
  }
}

EvalResult eval_fx(const FxProgram& prog,
                   const std::vector<std::int64_t>& inputs) {
  if (inputs.size() != prog.inputs.size()) {
    throw DimensionError("eval_fx: expected " +
                         std::to_string(prog.inputs.size()) + " inputs");
  }
  EvalResult result;
  result.nodes.resize(prog.nodes.size());
  std::size_t next_input = 0;
  for (std::size_t i = 0; i < prog.nodes.size(); ++i) {
    const FxNode& node = prog.nodes[i];
    __int128 v = 0;
    auto operand = [&](std::size_t k) -> __int128 {
      return result.nodes[static_cast<std::size_t>(node.operands[k])];
    };
    switch (node.kind) {
      case NodeKind::Input:
        v = inputs[next_input++];
        break;
      case NodeKind::Constant:
        v = node.quantized_coeff;
        break;
      case NodeKind::ConstMul:
        v = apply_shift(operand(0) * node.quantized_coeff, node.shift);
        break;
      case NodeKind::Add:
      case NodeKind::Sub: {
        const __int128 b = operand(0) * (__int128{1} << node.align[0]);
        const __int128 c = operand(1) * (__int128{1} << node.align[1]);
        v = apply_shift(node.kind == NodeKind::Add ? b + c : b - c,
                        node.shift);
        break;
      }
      case NodeKind::ShiftAlign:
        v = apply_shift(operand(0), node.shift);
        break;
    }
    if (!fits_int(v, node.format)) {
      const long long shown =
          v > INT64_MAX ? INT64_MAX : (v < INT64_MIN ? INT64_MIN
                                                     : static_cast<long long>(v));
      throw OverflowFault(node.id, shown);
    }
    result.nodes[i] = static_cast<std::int64_t>(v);
  }
  for (const FxOutput& out : prog.outputs) {
    result.outputs.push_back(result.nodes[static_cast<std::size_t>(out.node)]);
  }
  return result;
}

double output_real(const FxProgram& prog, const EvalResult& result,
                   std::size_t i) {
  const FxOutput& out = prog.outputs.at(i);
  const double v = to_real(result.outputs.at(i),
                           prog.nodes[static_cast<std::size_t>(out.node)].format.m);
  return out.negate ? -v : v;
}

namespace {

class RowEmitter {
 public:
  explicit RowEmitter(FxProgramBuilder& builder) : b_(builder) {}

  // Dot product accumulated left to right; the final node is named `name`
  // and takes `preferred` when that format holds its range.
  int row(const std::string& name,
          const std::vector<std::pair<int, double>>& all_terms,
          const std::optional<FxFormat>& preferred) {
    std::vector<std::pair<int, double>> terms;
    for (const auto& t : all_terms) {
      if (t.second != 0.0) terms.push_back(t);
    }
    const Interval range = b_.linear_range(terms);
    std::optional<FxFormat> final_format;
    if (preferred && preferred->holds(range)) final_format = preferred;
    if (terms.empty()) return b_.constant(name, 0.0, final_format);
    if (terms.size() == 1) {
      return b_.const_mul(name, terms[0].first, terms[0].second, final_format);
    }
    int acc = b_.const_mul(next_gain(), terms[0].first, terms[0].second);
    for (std::size_t j = 1; j < terms.size(); ++j) {
      const int t = b_.const_mul(next_gain(), terms[j].first, terms[j].second);
      const bool last = j + 1 == terms.size();
      acc = b_.add(last ? name : next_add(), acc, t,
                   last ? final_format : std::nullopt);
    }
    return acc;
  }

 private:
  std::string next_gain() { return "Gain" + std::to_string(++gains_); }
  std::string next_add() { return "Add" + std::to_string(++adds_); }

  FxProgramBuilder& b_;
  int gains_ = 0;
  int adds_ = 0;
};

std::string indexed(const std::string& base, Eigen::Index i,
                    Eigen::Index count) {
  return count == 1 ? base : base + std::to_string(i + 1);
}

}  // namespace

FxProgram synthesize_controller_program(const DiscretePlant& dp,
                                        const GainPair& gains,
                                        const std::vector<Interval>& y_box,
                                        const std::vector<Interval>& xhat_box,
                                        int bits, int coeff_bits) {
  dp.validate();
  plant::check_gains(dp, gains);
  const Eigen::Index n = dp.states();
  const Eigen::Index p = dp.outputs();
  const Eigen::Index m = dp.inputs();
  if (static_cast<Eigen::Index>(y_box.size()) != p ||
      static_cast<Eigen::Index>(xhat_box.size()) != n) {
    throw DimensionError("controller program: box sizes do not match plant");
  }
  const Matrix mm = dp.a - dp.b * gains.k - gains.l * dp.c;
  FxProgramBuilder b(bits, coeff_bits);
  std::vector<int> xs, ys;
  for (Eigen::Index i = 0; i < n; ++i) {
    xs.push_back(b.input("x" + std::to_string(i + 1),
                         xhat_box[static_cast<std::size_t>(i)]));
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    ys.push_back(b.input(indexed("y", i, p), y_box[static_cast<std::size_t>(i)]));
  }
  RowEmitter rows(b);
  std::vector<int> xnew;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (Eigen::Index j = 0; j < n; ++j) {
      terms.emplace_back(xs[static_cast<std::size_t>(j)], mm(i, j));
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      terms.emplace_back(ys[static_cast<std::size_t>(j)], gains.l(i, j));
    }
    xnew.push_back(rows.row("x" + std::to_string(i + 1) + "_new", terms,
                            b.format(xs[static_cast<std::size_t>(i)])));
  }
  std::vector<int> us;
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (Eigen::Index j = 0; j < n; ++j) {
      terms.emplace_back(xnew[static_cast<std::size_t>(j)], gains.k(i, j));
    }
    us.push_back(rows.row(indexed("u", i, m), terms, std::nullopt));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    b.output("x" + std::to_string(i + 1) + "_new",
             xnew[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    b.output(indexed("u", i, m), us[static_cast<std::size_t>(i)], true);
  }
  FxProgram prog = b.build();
  prog.n_state = static_cast<int>(n);
  prog.n_meas = static_cast<int>(p);
  return prog;
}

FxProgram synthesize_pid_program(const PidRealization& pid,
                                 const std::vector<Interval>& xhat_box,
                                 const Interval& uhat_box, int bits,
                                 int coeff_bits) {
  if (pid.a.rows() != 2 || pid.a.cols() != 2 || pid.b.rows() != 2 ||
      pid.b.cols() != 1 || pid.c.rows() != 1 || pid.c.cols() != 2 ||
      pid.d.rows() != 1 || pid.d.cols() != 1 || xhat_box.size() != 2) {
    throw DimensionError("PID program: expected a two-state SISO realization");
  }
  FxProgramBuilder b(bits, coeff_bits);
  const int x1 = b.input("x1", xhat_box[0]);
  const int x2 = b.input("x2", xhat_box[1]);
  const int uh = b.input("uhat", uhat_box);
  const int xs[2] = {x1, x2};
  RowEmitter rows(b);
  int xnew[2];
  for (int i = 0; i < 2; ++i) {
    xnew[i] = rows.row("x" + std::to_string(i + 1) + "_new",
                       {{x1, pid.a(i, 0)}, {x2, pid.a(i, 1)}, {uh, pid.b(i, 0)}},
                       b.format(xs[i]));
  }
  const int yh = rows.row(
      "yhat", {{x1, pid.c(0, 0)}, {x2, pid.c(0, 1)}, {uh, pid.d(0, 0)}},
      std::nullopt);
  b.output("x1_new", xnew[0]);
  b.output("x2_new", xnew[1]);
  b.output("yhat", yh);
  FxProgram prog = b.build();
  prog.n_state = 2;
  prog.n_meas = 1;
  return prog;
}

namespace {

Json format_json(const FxFormat& f) {
  return Json{{"signed", f.is_signed}, {"n", f.n}, {"m", f.m}};
}

FxFormat format_from(const Json& j) {
  FxFormat f{j.at("signed").get<bool>(), j.at("n").get<int>(),
             j.at("m").get<int>()};
  f.validate();
  return f;
}

}  // namespace

std::string program_to_json(const FxProgram& prog) {
  Json nodes = Json::array();
  for (const FxNode& node : prog.nodes) {
    Json ops = Json::array();
    for (int op : node.operands) ops.push_back(prog.nodes[static_cast<std::size_t>(op)].id);
    Json j{{"id", node.id},
           {"kind", std::string(to_string(node.kind))},
           {"operands", ops},
           {"format", format_json(node.format)},
           {"range", {node.range.lo, node.range.hi}}};
    if (node.kind == NodeKind::ConstMul || node.kind == NodeKind::Constant) {
      j["real_coeff"] = node.real_coeff;
      j["quantized_coeff"] = node.quantized_coeff;
      j["coeff_shift"] = node.coeff_shift;
    }
    if (node.kind != NodeKind::Input && node.kind != NodeKind::Constant) {
      j["shift"] = node.shift;
    }
    if (node.kind == NodeKind::Add || node.kind == NodeKind::Sub) {
      j["align"] = {node.align[0], node.align[1]};
    }
    nodes.push_back(std::move(j));
  }
  Json outputs = Json::array();
  for (const FxOutput& out : prog.outputs) {
    outputs.push_back({{"name", out.name},
                       {"node", prog.nodes[static_cast<std::size_t>(out.node)].id},
                       {"negate", out.negate}});
  }
  Json doc{{"bit_budget", prog.bit_budget},
           {"coeff_bits", prog.coeff_bits},
           {"n_state", prog.n_state},
           {"n_meas", prog.n_meas},
           {"nodes", nodes},
           {"outputs", outputs}};
  return doc.dump(2) + "\n";
}

FxProgram program_from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("program JSON: ") + e.what());
  }
  FxProgram prog;
  try {
    prog.bit_budget = doc.at("bit_budget").get<int>();
    prog.coeff_bits = doc.value("coeff_bits", prog.bit_budget);
    prog.n_state = doc.value("n_state", 0);
    prog.n_meas = doc.value("n_meas", 0);
    for (const Json& j : doc.at("nodes")) {
      FxNode node;
      node.id = j.at("id").get<std::string>();
      node.kind = node_kind_from_string(j.at("kind").get<std::string>());
      for (const Json& op : j.at("operands")) {
        const int idx = prog.find(op.get<std::string>());
        if (idx < 0) {
          throw ParseError("node '" + node.id + "' uses undefined operand '" +
                           op.get<std::string>() + "'");
        }
        node.operands.push_back(idx);
      }
      node.format = format_from(j.at("format"));
      const auto& r = j.at("range");
      node.range = Interval::make(r.at(0).get<double>(), r.at(1).get<double>());
      node.real_coeff = j.value("real_coeff", 0.0);
      node.quantized_coeff = j.value("quantized_coeff", std::int64_t{0});
      node.coeff_shift = j.value("coeff_shift", 0);
      node.shift = j.value("shift", 0);
      if (j.contains("align")) {
        node.align = {j["align"].at(0).get<int>(), j["align"].at(1).get<int>()};
      }
      if (prog.find(node.id) >= 0) {
        throw ParseError("duplicate node id '" + node.id + "'");
      }
      if (node.kind == NodeKind::Input) {
        prog.inputs.push_back(static_cast<int>(prog.nodes.size()));
      }
      prog.nodes.push_back(std::move(node));
    }
    for (const Json& j : doc.at("outputs")) {
      const std::string target = j.at("node").get<std::string>();
      const int idx = prog.find(target);
      if (idx < 0) throw ParseError("output references unknown node '" + target + "'");
      prog.outputs.push_back(
          FxOutput{j.at("name").get<std::string>(), idx, j.value("negate", false)});
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("program JSON: ") + e.what());
  }
  validate_program(prog);
  return prog;
}

}  // namespace fxsynth
