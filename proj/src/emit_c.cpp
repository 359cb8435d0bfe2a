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

#include "fxsynth/emit_c.hpp"

#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "fxsynth/error.hpp"

namespace fxsynth {

namespace {

const std::set<std::string>& reserved() {
  static const std::set<std::string> words = {
      "auto", "break", "case", "char", "const", "continue", "default", "do",
      "double", "else", "enum", "extern", "float", "for", "goto", "if", "int",
      "long", "register", "return", "short", "signed", "sizeof", "static",
      "struct", "switch", "typedef", "union", "unsigned", "void", "volatile",
      "while", "fx_t", "fx_wide", "in", "out", "yin", "uout", "FX_SHR",
      "FX_SHL", "fx_width_check"};
  return words;
}

std::string sanitize(const std::string& id) {
  std::string s;
  for (char ch : id) {
    s += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') ? ch : '_';
  }
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) s = "v_" + s;
  if (reserved().count(s)) s += "_";
  return s;
}

std::string fixdt(const FxFormat& f) {
  return "/* fixdt(" + std::to_string(f.is_signed ? 1 : 0) + "," +
         std::to_string(f.n) + "," + std::to_string(f.m) + ") */";
}

std::string lit(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v)
                            : static_cast<unsigned __int128>(v);
  std::string digits;
  do {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  } while (u != 0);
  return (neg ? "-" : "") + digits + "L";
}

std::string pow2(int m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", std::ldexp(1.0, m));
  return buf;
}

__int128 magnitude(const FxFormat& f) {
  return std::max<__int128>(-static_cast<__int128>(f.min_int()), f.max_int());
}

std::string shifted(const std::string& expr, int shift) {
  if (shift > 0) return "FX_SHR(" + expr + ", " + std::to_string(shift) + ")";
  if (shift < 0) return "FX_SHL(" + expr + ", " + std::to_string(-shift) + ")";
  return expr;
}

}  // namespace

std::string emit_c_source(const FxProgram& prog,
                          const std::string& function_name) {
  validate_program(prog);
  const bool wide64 = prog.bit_budget > 16;
  const __int128 limit =
      wide64 ? static_cast<__int128>(INT64_MAX) : __int128{2147483647};
  std::vector<std::string> names;
  std::set<std::string> taken;
  for (const FxNode& node : prog.nodes) {
    std::string s = sanitize(node.id);
    while (taken.count(s)) s += "_";
    taken.insert(s);
    names.push_back(s);
  }
  const std::string fname = sanitize(function_name);

  std::ostringstream os;
  os << "/* Fixed-point controller generated by fxsynth. */\n";
  os << "/* Right shifts truncate toward zero (sign-magnitude). */\n\n";
  if (wide64) {
    os << "typedef long fx_t;\ntypedef long fx_wide;\n";
    os << "typedef char fx_width_check[(sizeof(long) >= 8) ? 1 : -1];\n\n";
  } else {
    os << "typedef int fx_t;\ntypedef long fx_wide;\n";
    os << "typedef char fx_width_check[(sizeof(int) >= 4) ? 1 : -1];\n\n";
  }
  os << "#define FX_SHR(v, k) ((v) < 0 ? -((-(v)) >> (k)) : ((v) >> (k)))\n";
  os << "#define FX_SHL(v, k) ((v) * ((fx_wide)1 << (k)))\n\n";

  const bool controller = prog.n_state > 0 || prog.n_meas > 0;
  const std::size_t n_state = static_cast<std::size_t>(prog.n_state);
  const std::size_t n_meas = static_cast<std::size_t>(prog.n_meas);
  const std::size_t n_ctrl = prog.outputs.size() - std::min(prog.outputs.size(), n_state);
  const bool scalar = controller && n_meas == 1 && n_ctrl == 1;

  if (scalar) {
    os << "float " << fname << "(float yin)\n{\n";
  } else if (controller) {
    os << "void " << fname << "(const float yin[], float uout[])\n{\n";
  } else {
    os << "void " << fname << "(const long in[], long out[])\n{\n";
  }

  std::vector<bool> is_state(prog.nodes.size(), false);
  for (std::size_t i = 0; i < prog.inputs.size(); ++i) {
    const auto idx = static_cast<std::size_t>(prog.inputs[i]);
    if (controller && i < n_state) {
      is_state[idx] = true;
      os << "    static fx_t " << names[idx] << " = 0; "
         << fixdt(prog.nodes[idx].format) << "\n";
    }
  }
  for (std::size_t i = 0; i < prog.nodes.size(); ++i) {
    if (is_state[i]) continue;
    os << "    fx_t " << names[i] << "; " << fixdt(prog.nodes[i].format) << "\n";
  }
  os << "\n";

  // Inputs.
  for (std::size_t i = 0; i < prog.inputs.size(); ++i) {
    const auto idx = static_cast<std::size_t>(prog.inputs[i]);
    if (is_state[idx]) continue;
    const FxNode& node = prog.nodes[idx];
    if (controller) {
      const std::string src =
          scalar ? std::string("yin") : "yin[" + std::to_string(i - n_state) + "]";
      os << "    " << names[idx] << " = (fx_t)((double)" << src << " * "
         << pow2(node.format.m) << ");\n";
    } else {
      os << "    " << names[idx] << " = (fx_t)in[" << i << "];\n";
    }
  }

  for (std::size_t i = 0; i < prog.nodes.size(); ++i) {
    const FxNode& node = prog.nodes[i];
    auto operand = [&](int k) {
      return names[static_cast<std::size_t>(node.operands[static_cast<std::size_t>(k)])];
    };
    auto operand_fmt = [&](int k) -> const FxFormat& {
      return prog.nodes[static_cast<std::size_t>(node.operands[static_cast<std::size_t>(k)])].format;
    };
    __int128 bound = 0;
    std::string expr;
    switch (node.kind) {
      case NodeKind::Input:
        continue;
      case NodeKind::Constant:
        os << "    " << names[i] << " = " << lit(node.quantized_coeff) << ";\n";
        continue;
      case NodeKind::ConstMul: {
        const __int128 k = node.quantized_coeff;
        bound = (k < 0 ? -k : k) * magnitude(operand_fmt(0));
        expr = "(fx_wide)" + lit(node.quantized_coeff) + " * " + operand(0);
        break;
      }
      case NodeKind::Add:
      case NodeKind::Sub: {
        bound = (magnitude(operand_fmt(0)) << node.align[0]) +
                (magnitude(operand_fmt(1)) << node.align[1]);
        const std::string lhs = shifted("(fx_wide)" + operand(0), -node.align[0]);
        const std::string rhs = shifted("(fx_wide)" + operand(1), -node.align[1]);
        expr = lhs + (node.kind == NodeKind::Add ? " + " : " - ") + rhs;
        break;
      }
      case NodeKind::ShiftAlign:
        bound = magnitude(operand_fmt(0));
        expr = "(fx_wide)" + operand(0);
        break;
    }
    if (node.shift < 0) bound <<= -node.shift;
    if (bound > limit) {
      throw UnsupportedError("node '" + node.id +
                             "' needs a wider intermediate than C89 guarantees");
    }
    os << "    " << names[i] << " = (fx_t)"
       << (node.shift == 0 ? "(" + expr + ")" : shifted("(" + expr + ")", node.shift))
       << ";\n";
  }
  os << "\n";

  // Outputs.
  if (controller) {
    for (std::size_t j = n_state; j < prog.outputs.size(); ++j) {
      const FxOutput& out = prog.outputs[j];
      const auto idx = static_cast<std::size_t>(out.node);
      const std::string value = std::string(out.negate ? "-" : "") + "(double)" +
                                names[idx] + " / " + pow2(prog.nodes[idx].format.m);
      if (!scalar) {
        os << "    uout[" << j - n_state << "] = (float)(" << value << ");\n";
      }
    }
    for (std::size_t j = 0; j < n_state; ++j) {
      const auto in_idx = static_cast<std::size_t>(prog.inputs[j]);
      const auto out_idx = static_cast<std::size_t>(prog.outputs[j].node);
      const int shift = prog.nodes[out_idx].format.m - prog.nodes[in_idx].format.m;
      os << "    " << names[in_idx] << " = "
         << (shift == 0 ? names[out_idx]
                        : "(fx_t)" + shifted("(fx_wide)" + names[out_idx], shift))
         << ";\n";
    }
    if (scalar) {
      const FxOutput& out = prog.outputs[n_state];
      const auto idx = static_cast<std::size_t>(out.node);
      os << "    return (float)(" << (out.negate ? "-" : "") << "(double)"
         << names[idx] << " / " << pow2(prog.nodes[idx].format.m) << ");\n";
    }
  } else {
    for (std::size_t j = 0; j < prog.outputs.size(); ++j) {
      const FxOutput& out = prog.outputs[j];
      os << "    out[" << j << "] = " << (out.negate ? "-" : "") << "(long)"
         << names[static_cast<std::size_t>(out.node)] << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace fxsynth
