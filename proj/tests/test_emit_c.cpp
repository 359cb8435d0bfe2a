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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "c89_check.hpp"
#include "fxsynth/analysis.hpp"
#include "fxsynth/emit_c.hpp"
#include "fxsynth/error.hpp"
#include "fxsynth/fxprogram.hpp"

using namespace fxsynth;
using linalg::from_rows;

namespace {

DiscretePlant bicycle_dp() {
  ContinuousPlant p;
  p.a = from_rows({{0, 9.8 / 1.5}, {1, 0}});
  p.b = from_rows({{1}, {0}});
  p.bbar = p.b;
  p.c = from_rows({{0.5 * 2 / 1.5, 4 / 1.5}});
  return plant::discretize(p, 0.01);
}

FxProgram bicycle_program() {
  const DiscretePlant dp = bicycle_dp();
  const GainPair g{from_rows({{3.0253, 12.6089}}), from_rows({{0.0132}, {0.1021}})};
  const auto qc = QuantizationConfig::unit_boxes(dp, 16);
  return synthesize_controller_program(dp, g, qc.y_box, qc.xhat_box, 16);
}

FxProgram reactor_program() {
  ContinuousPlant p;
  p.a = from_rows({{1.38, -0.2077, 6.715, -5.676},
                   {-0.5814, -4.29, 0, 0.675},
                   {1.067, 4.273, -6.654, 5.893},
                   {0.048, 4.273, 1.343, -2.104}});
  p.b = from_rows({{0, 0}, {5.679, 0}, {1.136, -3.146}, {1.136, 0}});
  p.bbar = from_rows({{1}, {1}, {1}, {1}});
  p.c = from_rows({{1, 0, 1, -1}, {0, 1, 0, 0}});
  const DiscretePlant dp = plant::discretize(p, 0.01);
  const GainPair g{
      from_rows({{0.0583, 0.9093, 0.3258, 0.8721}, {-2.4638, -0.0504, -1.7099, 1.1653}}),
      from_rows({{0.0774, -0.0103}, {-0.0022, 0.0227}, {0.0267, 0.0398}, {0.0356, 0.0001}})};
  const auto qc = QuantizationConfig::unit_boxes(dp, 16);
  return synthesize_controller_program(dp, g, qc.y_box, qc.xhat_box, 16);
}

FxProgram worked_example() {
  FxProgramBuilder b(16, 8);
  const int x = b.input("x", Interval{-1, 1});
  b.output("y", b.const_mul("y", x, -7.2479));
  return b.build();
}

std::string problems(const c89::Report& r) {
  std::string s;
  for (const auto& p : r.problems) s += p + "\n";
  return s;
}

std::string run(const std::string& cmd) {
  std::string out;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  pclose(f);
  return out;
}

bool have_cc() { return std::system("cc --version > /dev/null 2>&1") == 0; }

}  // namespace

// The checker itself.
TEST(C89Check, AcceptsPlainC) {
  const auto r = c89::check(
      "typedef int fx_t;\n/* c */\nint f(int a)\n{\n    fx_t b;\n    int c;\n"
      "    b = (fx_t)a;\n    c = b >> 1;\n    return c;\n}\n");
  EXPECT_TRUE(r.ok()) << problems(r);
}

TEST(C89Check, RejectsLaterDialects) {
  EXPECT_FALSE(c89::check("int f(void) { return 0; } // x\n").ok());
  EXPECT_FALSE(c89::check("int f(void) { int a; a = 1; int b; return a; }\n").ok());
  EXPECT_FALSE(c89::check("long long x;\n").ok());
  EXPECT_FALSE(c89::check("static inline int f(void) { return 0; }\n").ok());
  EXPECT_FALSE(c89::check("int f(void) { for (int i = 0; i < 2; ++i) {} return 0; }\n").ok());
  EXPECT_FALSE(c89::check("int f(void) { return (1; }\n").ok());
  EXPECT_FALSE(c89::check("double d = 0x1p3;\n").ok());
  EXPECT_FALSE(c89::check("long x = 5LL;\n").ok());
}

TEST(EmitC, BicycleIsC89AndMatchesListing) {
  const std::string src = emit_c_source(bicycle_program());
  const auto r = c89::check(src);
  EXPECT_TRUE(r.ok()) << problems(r) << src;
  EXPECT_NE(src.find("float controller(float yin)"), std::string::npos);
  EXPECT_NE(src.find("FX_SHR(((fx_wide)31498L * x1), 14)"), std::string::npos);
  EXPECT_NE(src.find("FX_SHR(((fx_wide)Gain7 + FX_SHL((fx_wide)Gain8, 2)), 2)"),
            std::string::npos);
  EXPECT_NE(src.find("/* fixdt(1,16,11) */"), std::string::npos);
  EXPECT_EQ(src.find("//"), std::string::npos);
}

TEST(EmitC, MimoAndFreeFormAreC89) {
  for (const FxProgram& p : {reactor_program(), worked_example()}) {
    const std::string src = emit_c_source(p, "step");
    const auto r = c89::check(src);
    EXPECT_TRUE(r.ok()) << problems(r) << src;
  }
  EXPECT_NE(emit_c_source(reactor_program()).find("const float yin[], float uout[]"),
            std::string::npos);
  EXPECT_NE(emit_c_source(worked_example()).find("const long in[], long out[]"),
            std::string::npos);
}

TEST(EmitC, SanitizesFunctionName) {
  const std::string src = emit_c_source(worked_example(), "my ctl-1");
  EXPECT_TRUE(c89::check(src).ok());
  EXPECT_EQ(src.find("my ctl-1"), std::string::npos);
}

TEST(EmitC, DeterministicText) {
  EXPECT_EQ(emit_c_source(bicycle_program()), emit_c_source(bicycle_program()));
}

// Compiles the emitted controller with the host C compiler in strict C89 mode
// and compares its outputs against eval_fx step by step.
TEST(EmitC, CompiledControllerMatchesEvalFx) {
  if (!have_cc()) GTEST_SKIP() << "no C compiler";
  const FxProgram prog = bicycle_program();
  const std::string dir = testing::TempDir();
  {
    std::ofstream f(dir + "/ctl.c");
    f << emit_c_source(prog) << "\n#include <stdio.h>\n"
      << "int main(void)\n{\n    long k;\n    for (k = 0; k < 500; ++k) {\n"
      << "        long q = (k * 7919L) % 32768L - 16384L;\n"
      << "        printf(\"%.17g\\n\", (double)controller((float)((double)q / 16384.0)));\n"
      << "    }\n    return 0;\n}\n";
  }
  const std::string exe = dir + "/ctl_bin";
  ASSERT_EQ(std::system(("cc -std=c89 -pedantic-errors -Wall -Wdeclaration-after-statement "
                         "-Werror -o " + exe + " " + dir + "/ctl.c").c_str()),
            0);
  std::istringstream out(run(exe));
  std::vector<std::int64_t> state(2, 0);
  for (long k = 0; k < 500; ++k) {
    const std::int64_t q = (k * 7919L) % 32768L - 16384L;
    const EvalResult r = eval_fx(prog, {state[0], state[1], q});
    for (std::size_t i = 0; i < 2; ++i) {
      const int shift = prog.nodes[static_cast<std::size_t>(prog.outputs[i].node)].format.m -
                        prog.nodes[static_cast<std::size_t>(prog.inputs[i])].format.m;
      state[i] = static_cast<std::int64_t>(shift_right_sm(r.outputs[i], shift));
    }
    double got = 0;
    ASSERT_TRUE(out >> got) << "step " << k;
    EXPECT_EQ(got, output_real(prog, r, 2)) << "step " << k;
  }
}

TEST(EmitC, CompiledFreeFormMatchesEvalFx) {
  if (!have_cc()) GTEST_SKIP() << "no C compiler";
  const FxProgram prog = worked_example();
  const std::string dir = testing::TempDir();
  {
    std::ofstream f(dir + "/free.c");
    f << emit_c_source(prog, "f") << "\n#include <stdio.h>\n"
      << "int main(void)\n{\n    long in[1];\n    long out[1];\n    long x;\n"
      << "    for (x = -16384; x <= 16383; x += 37) {\n"
      << "        in[0] = x;\n        f(in, out);\n        printf(\"%ld\\n\", out[0]);\n"
      << "    }\n    return 0;\n}\n";
  }
  const std::string exe = dir + "/free_bin";
  ASSERT_EQ(std::system(("cc -std=c89 -pedantic-errors -Wall -Werror -o " + exe + " " + dir +
                         "/free.c").c_str()),
            0);
  std::istringstream out(run(exe));
  for (long x = -16384; x <= 16383; x += 37) {
    long got = 0;
    ASSERT_TRUE(out >> got);
    EXPECT_EQ(got, eval_fx(prog, {x}).outputs[0]) << x;
  }
}
