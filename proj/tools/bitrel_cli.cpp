// SPDX-License-Identifier: Apache-2.0
// bitrel: command-line frontend over the shared-library C API.
//
// Exit codes: 0 ok, 1 usage error, 2 parse/analysis error, 3 validation
// found unsound equivalence pairs.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bitrel/bitrel.h"

namespace {

struct Freed {
  char* s = nullptr;
  ~Freed() { bitrel_free_string(s); }
  std::string str() const { return s ? s : ""; }
};

struct ProgramHandle {
  bitrel_program* p = nullptr;
  ~ProgramHandle() { bitrel_program_free(p); }
};

struct AnalysisHandle {
  bitrel_analysis* a = nullptr;
  ~AnalysisHandle() { bitrel_analysis_free(a); }
};

int code_of(int rc) {
  switch (rc) {
    case BITREL_OK: return 0;
    case BITREL_ERR_USAGE: return 1;
    case BITREL_ERR_UNSOUND: return 3;
    default: return 2;
  }
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << text;
  return bool(out);
}

struct Inputs {
  std::vector<unsigned> regs;
  std::vector<uint64_t> vals;
};

// "rK=V" with V decimal, 0x... or 0b...
bool parse_input(const std::string& s, Inputs& io) {
  size_t eq = s.find('=');
  if (eq == std::string::npos || s.empty() || s[0] != 'r') return false;
  try {
    size_t pos = 0;
    unsigned reg = std::stoul(s.substr(1, eq - 1), &pos);
    if (pos != eq - 1) return false;
    std::string v = s.substr(eq + 1);
    uint64_t val;
    if (v.starts_with("0x") || v.starts_with("0X"))
      val = std::stoull(v.substr(2), &pos, 16), pos += 2;
    else if (v.starts_with("0b") || v.starts_with("0B"))
      val = std::stoull(v.substr(2), &pos, 2), pos += 2;
    else
      val = std::stoull(v, &pos, 10);
    if (pos != v.size()) return false;
    io.regs.push_back(reg);
    io.vals.push_back(val);
    return true;
  } catch (...) {
    return false;
  }
}

// "CYCLE:rK:BIT"
bool parse_flip(const std::string& s, long& cycle, unsigned& reg,
                unsigned& bit) {
  size_t c1 = s.find(':'), c2 = s.rfind(':');
  if (c1 == std::string::npos || c2 == c1) return false;
  std::string rs = s.substr(c1 + 1, c2 - c1 - 1);
  if (rs.empty() || rs[0] != 'r') return false;
  try {
    cycle = std::stol(s.substr(0, c1));
    reg = std::stoul(rs.substr(1));
    bit = std::stoul(s.substr(c2 + 1));
    return true;
  } catch (...) {
    return false;
  }
}

struct Common {
  std::string program_path;
  std::string function;
  std::vector<std::string> input_flags;
  unsigned width_override = 0;
  unsigned regs_override = 0;
};

// Loads + parses + analyzes; prints errors itself. Returns exit code, 0 ok.
int load(const Common& c, ProgramHandle& ph, AnalysisHandle& ah, Inputs& io) {
  auto text = read_file(c.program_path);
  if (!text) {
    std::cerr << "bitrel: cannot read " << c.program_path << "\n";
    return 1;
  }
  Freed err;
  ph.p = bitrel_parse(text->c_str(), &err.s);
  if (!ph.p) {
    std::cerr << "bitrel: " << c.program_path << ": " << err.str() << "\n";
    return 2;
  }
  size_t index = 0;
  if (!c.function.empty()) {
    size_t n = bitrel_program_function_count(ph.p);
    index = n;
    for (size_t i = 0; i < n; ++i) {
      Freed name{bitrel_program_function_name(ph.p, i)};
      if (name.str() == c.function) index = i;
    }
    if (index == n) {
      std::cerr << "bitrel: no function named " << c.function << "\n";
      return 1;
    }
  }
  if (c.width_override &&
      bitrel_program_function_width(ph.p, index) != c.width_override) {
    std::cerr << "bitrel: --width " << c.width_override
              << " does not match the program header\n";
    return 1;
  }
  if (c.regs_override &&
      bitrel_program_function_regs(ph.p, index) != c.regs_override) {
    std::cerr << "bitrel: --regs " << c.regs_override
              << " does not match the program header\n";
    return 1;
  }
  Freed err2;
  ah.a = bitrel_analyze(ph.p, c.function.empty() ? nullptr : c.function.c_str(),
                        &err2.s);
  if (!ah.a) {
    std::cerr << "bitrel: " << err2.str() << "\n";
    return 2;
  }
  for (const std::string& s : c.input_flags)
    if (!parse_input(s, io)) {
      std::cerr << "bitrel: bad --input value: " << s << " (want rK=V)\n";
      return 1;
    }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bit-level soft-error reliability toolkit"};
  app.require_subcommand(1);

  unsigned width_override = 0, regs_override = 0;
  int jobs = 1;
  uint64_t seed = 1;
  std::string out_dir = ".";
  app.add_option("--width", width_override,
                 "expected bit width (rejected on mismatch)");
  app.add_option("--regs", regs_override,
                 "expected register count (rejected on mismatch)");
  app.add_option("--jobs", jobs, "campaign worker threads");
  app.add_option("--seed", seed, "corpus generation seed");
  app.add_option("--out", out_dir, "output directory");

  std::string program_path, function;
  std::vector<std::string> input_flags;
  auto add_common = [&](CLI::App* sub, bool needs_program = true) {
    if (needs_program)
      sub->add_option("program", program_path, "BIR program file")
          ->required();
    sub->add_option("--function", function, "function to analyze");
    sub->add_option("--input", input_flags, "initial value rK=V");
  };

  auto* cmd_analyze = app.add_subcommand("analyze", "per-point bit values");
  add_common(cmd_analyze);
  auto* cmd_coalesce =
      app.add_subcommand("coalesce", "fault-site equivalence classes");
  add_common(cmd_coalesce);

  auto* cmd_prune = app.add_subcommand("prune", "campaign plan + accounting");
  add_common(cmd_prune);
  std::string baseline;
  std::vector<std::string> emit;
  long cycle_limit = 0;
  cmd_prune->add_option("--baseline", baseline,
                        "plan the unpruned baseline (inject-on-read)");
  cmd_prune->add_option("--emit", emit, "plan and stats output paths")
      ->expected(2);
  cmd_prune->add_option("--cycle-limit", cycle_limit, "execution cap");

  auto* cmd_schedule =
      app.add_subcommand("schedule", "reliability-aware list scheduling");
  add_common(cmd_schedule);
  std::string policy = "best";
  std::string report_path;
  cmd_schedule->add_option("--policy", policy, "best|worst|original");
  cmd_schedule->add_option("--report", report_path,
                           "vulnerability report path");
  cmd_schedule->add_option("--cycle-limit", cycle_limit, "execution cap");

  auto* cmd_simulate = app.add_subcommand("simulate", "single execution");
  add_common(cmd_simulate);
  std::vector<std::string> flip_flags;
  cmd_simulate->add_option("--flip", flip_flags, "bit flip CYCLE:rK:BIT");
  cmd_simulate->add_option("--cycle-limit", cycle_limit, "execution cap");

  auto* cmd_campaign = app.add_subcommand("campaign", "fault campaign");
  add_common(cmd_campaign);
  std::string plan_arg = "full";
  cmd_campaign->add_option("--plan", plan_arg, "plan file or 'full'");
  cmd_campaign->add_option("--cycle-limit", cycle_limit, "execution cap");

  auto* cmd_expand =
      app.add_subcommand("expand", "pruned results -> full space");
  std::string plan_path, results_path;
  cmd_expand->add_option("--plan", plan_path, "plan file")->required();
  cmd_expand->add_option("--results", results_path, "pruned campaign file")
      ->required();

  auto* cmd_validate =
      app.add_subcommand("validate", "exhaustive soundness check");
  add_common(cmd_validate);
  cmd_validate->add_option("--cycle-limit", cycle_limit, "execution cap");

  auto* cmd_gen = app.add_subcommand("gen-corpus", "generate programs");
  int count = 10;
  cmd_gen->add_option("--count", count, "number of programs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  Common common{program_path, function, input_flags, width_override,
                regs_override};

  if (cmd_gen->parsed()) {
    std::filesystem::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
      Freed text{bitrel_gen_corpus_program(seed, i)};
      char name[32];
      std::snprintf(name, sizeof name, "prog_%03d.bir", i);
      std::string path = out_dir + "/" + name;
      if (!write_file(path, text.str())) {
        std::cerr << "bitrel: cannot write " << path << "\n";
        return 1;
      }
      std::cout << path << "\n";
    }
    return 0;
  }

  if (cmd_expand->parsed()) {
    auto plan_text = read_file(plan_path);
    auto results_text = read_file(results_path);
    if (!plan_text || !results_text) {
      std::cerr << "bitrel: cannot read plan/results files\n";
      return 1;
    }
    Freed out, err;
    int rc = bitrel_expand(plan_text->c_str(), results_text->c_str(), &out.s,
                           &err.s);
    if (rc != BITREL_OK) {
      std::cerr << "bitrel: " << err.str() << "\n";
      return code_of(rc);
    }
    std::cout << out.str() << "\n";
    return 0;
  }

  ProgramHandle ph;
  AnalysisHandle ah;
  Inputs io;
  if (int rc = load(common, ph, ah, io)) return rc;

  if (cmd_analyze->parsed()) {
    Freed out{bitrel_analysis_bitvalues_json(ah.a)};
    std::cout << out.str() << "\n";
    return 0;
  }
  if (cmd_coalesce->parsed()) {
    Freed out{bitrel_analysis_coalesce_json(ah.a)};
    std::cout << out.str() << "\n";
    return 0;
  }
  if (cmd_prune->parsed()) {
    if (!baseline.empty() && baseline != "inject-on-read") {
      std::cerr << "bitrel: unknown baseline " << baseline << "\n";
      return 1;
    }
    Freed plan, stats, err;
    int rc = bitrel_plan(ah.a, io.regs.data(), io.vals.data(), io.regs.size(),
                         baseline.empty() ? 1 : 0, cycle_limit, &plan.s,
                         &stats.s, &err.s);
    if (rc != BITREL_OK) {
      std::cerr << "bitrel: " << err.str() << "\n";
      return code_of(rc);
    }
    std::string plan_out = emit.empty() ? out_dir + "/plan.json" : emit[0];
    std::string stats_out = emit.empty() ? out_dir + "/stats.json" : emit[1];
    std::filesystem::create_directories(
        std::filesystem::path(plan_out).parent_path().empty()
            ? "."
            : std::filesystem::path(plan_out).parent_path().string());
    if (!write_file(plan_out, plan.str() + "\n") ||
        !write_file(stats_out, stats.str() + "\n")) {
      std::cerr << "bitrel: cannot write outputs\n";
      return 1;
    }
    std::cout << stats.str() << "\n";
    return 0;
  }
  if (cmd_schedule->parsed()) {
    Freed text, report, err;
    int rc = bitrel_schedule(ah.a, io.regs.data(), io.vals.data(),
                             io.regs.size(), policy.c_str(), cycle_limit,
                             &text.s, &report.s, &err.s);
    if (rc != BITREL_OK) {
      std::cerr << "bitrel: " << err.str() << "\n";
      return code_of(rc);
    }
    std::cout << text.str();
    std::string rp =
        report_path.empty() ? out_dir + "/schedule_report.json" : report_path;
    if (!write_file(rp, report.str() + "\n")) {
      std::cerr << "bitrel: cannot write " << rp << "\n";
      return 1;
    }
    std::cerr << "report: " << rp << "\n";
    return 0;
  }
  if (cmd_simulate->parsed()) {
    std::vector<long> cycles;
    std::vector<unsigned> regs, bits;
    for (const std::string& f : flip_flags) {
      long c;
      unsigned r, b;
      if (!parse_flip(f, c, r, b)) {
        std::cerr << "bitrel: bad --flip value: " << f
                  << " (want CYCLE:rK:BIT)\n";
        return 1;
      }
      cycles.push_back(c);
      regs.push_back(r);
      bits.push_back(b);
    }
    Freed trace, err;
    int rc = bitrel_simulate(ah.a, io.regs.data(), io.vals.data(),
                             io.regs.size(), cycles.data(), regs.data(),
                             bits.data(), cycles.size(), cycle_limit,
                             &trace.s, &err.s);
    if (rc != BITREL_OK) {
      std::cerr << "bitrel: " << err.str() << "\n";
      return code_of(rc);
    }
    std::cout << trace.str();
    return 0;
  }
  if (cmd_campaign->parsed()) {
    std::string plan_text;
    if (plan_arg != "full") {
      auto t = read_file(plan_arg);
      if (!t) {
        std::cerr << "bitrel: cannot read " << plan_arg << "\n";
        return 1;
      }
      plan_text = *t;
    }
    Freed out, summary, err;
    int rc = bitrel_campaign(
        ah.a, io.regs.data(), io.vals.data(), io.regs.size(),
        plan_text.empty() ? nullptr : plan_text.c_str(), jobs, cycle_limit,
        &out.s, &summary.s, &err.s);
    if (rc != BITREL_OK) {
      std::cerr << "bitrel: " << err.str() << "\n";
      return code_of(rc);
    }
    std::cout << out.str() << "\n";
    std::cerr << summary.str() << "\n";
    return 0;
  }
  if (cmd_validate->parsed()) {
    Freed report, err;
    int rc = bitrel_validate(ah.a, io.regs.data(), io.vals.data(),
                             io.regs.size(), jobs, cycle_limit, &report.s,
                             &err.s);
    if (rc != BITREL_OK && rc != BITREL_ERR_UNSOUND) {
      std::cerr << "bitrel: " << err.str() << "\n";
      return code_of(rc);
    }
    std::cout << report.str() << "\n";
    return code_of(rc);
  }
  return 1;
}
