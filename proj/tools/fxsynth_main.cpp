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

// fxsynth command-line front end.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fxsynth/emit_c.hpp"
#include "fxsynth/error.hpp"
#include "fxsynth/problem.hpp"
#include "fxsynth/synthesis.hpp"

namespace {

using namespace fxsynth;

enum Exit { kOk = 0, kUsage = 1, kUnstable = 2, kNumeric = 3 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<int> bits;
  std::optional<double> tau;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "PSO seed");
  cmd->add_option("--bits", c.bits, "word length of the controller")->check(CLI::Range(2, 32));
  cmd->add_option("--tau", c.tau, "sampling time in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "directory for report.json and artifacts");
}

RunOptions to_options(const Common& c) {
  RunOptions o;
  o.seed = c.seed;
  o.bits = c.bits;
  o.tau = c.tau;
  return o;
}

void load_gains(const ProblemSpec& spec, const std::string& path, RunOptions& o) {
  const std::string text = load_text(path);
  if (spec.mode == Mode::Pid) {
    o.pid_gains = parse_pid_gains(text);
  } else {
    o.gains = parse_gains(text);
  }
}

int finish(const RunReport& rep, const std::string& out) {
  if (!out.empty()) {
    write_artifacts(rep, out);
    std::cerr << "wrote " << out << "\n";
  }
  std::cout << report_to_json(rep);
  return kOk;
}

void print_calibration(const ProblemSpec& spec) {
  const auto targets = published_targets(spec.name);
  if (!targets) throw ConfigError("no published baseline for '" + spec.name + "'");
  const auto [cands, best] = calibrate_tau(spec, targets->s_baseline, targets->p_baseline);
  std::printf("%-8s %-14s %-14s %s\n", "tau", "S_norm", "P_norm", "rel_error");
  for (std::size_t i = 0; i < cands.size(); ++i) {
    std::printf("%-8g %-14.8g %-14.8g %.3e%s\n", cands[i].tau, cands[i].s_norm,
                cands[i].p_norm, cands[i].rel_error, i == best ? "  <- best" : "");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-point aware controller synthesis"};
  app.require_subcommand(1);

  Common run_c;
  std::string run_spec, run_gains;
  bool run_analyze_only = false;
  auto* run = app.add_subcommand("run", "synthesize gains for a problem file");
  run->add_option("spec", run_spec, "problem JSON")->required()->check(CLI::ExistingFile);
  run->add_flag("--analyze-only", run_analyze_only, "skip the search");
  run->add_option("--gains", run_gains, "gains JSON for --analyze-only")->check(CLI::ExistingFile);
  add_common(run, run_c);

  Common an_c;
  std::string an_spec, an_gains;
  auto* analyze = app.add_subcommand("analyze", "metrics of given gains");
  analyze->add_option("spec", an_spec, "problem JSON")->required()->check(CLI::ExistingFile);
  analyze->add_option("--gains", an_gains, "gains JSON")->required()->check(CLI::ExistingFile);
  add_common(analyze, an_c);

  Common bench_c;
  std::string bench_name;
  bool bench_published = false, bench_dump = false, bench_calibrate = false;
  auto* bench = app.add_subcommand("bench", "run a built-in benchmark system");
  bench->add_option("preset", bench_name, "bicycle, dc_motor, pitch, inverted_pendulum, batch_reactor or pid_pendulum")
      ->required();
  bench->add_flag("--published-gains", bench_published, "analyze the published gains instead of searching");
  bench->add_flag("--dump-spec", bench_dump, "print the preset as a problem file");
  bench->add_flag("--calibrate-tau", bench_calibrate, "sweep tau against the published baseline");
  add_common(bench, bench_c);

  std::string emit_path, emit_name = "controller";
  auto* emit = app.add_subcommand("emit-c", "C source for a program JSON");
  emit->add_option("program", emit_path, "program JSON")->required()->check(CLI::ExistingFile);
  emit->add_option("--name", emit_name, "function name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (run->parsed()) {
      RunOptions o = to_options(run_c);
      const ProblemSpec spec = load_problem(run_spec);
      o.analyze_only = run_analyze_only;
      if (!run_gains.empty()) {
        if (!run_analyze_only) throw ConfigError("--gains requires --analyze-only");
        load_gains(spec, run_gains, o);
      }
      return finish(run_synthesis(spec, o), run_c.out);
    }
    if (analyze->parsed()) {
      RunOptions o = to_options(an_c);
      const ProblemSpec spec = apply_options(load_problem(an_spec), o);
      load_gains(spec, an_gains, o);
      if (spec.mode == Mode::Lqg && an_c.out.empty()) {
        std::cout << analysis_to_json(analyze_gains(spec, *o.gains));
        return kOk;
      }
      o.analyze_only = true;
      return finish(run_synthesis(spec, o), an_c.out);
    }
    if (bench->parsed()) {
      const ProblemSpec spec = preset(bench_name);
      if (bench_dump) {
        std::cout << save_problem(apply_options(spec, to_options(bench_c)));
        return kOk;
      }
      if (bench_calibrate) {
        print_calibration(spec);
        return kOk;
      }
      RunOptions o = to_options(bench_c);
      o.analyze_only = bench_published;
      return finish(run_synthesis(spec, o), bench_c.out);
    }
    if (emit->parsed()) {
      std::cout << emit_c_source(program_from_json(load_text(emit_path)), emit_name);
      return kOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NoSolutionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnstable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}
