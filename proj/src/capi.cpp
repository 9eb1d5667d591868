// SPDX-License-Identifier: Apache-2.0
#include "bitrel/bitrel.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "bitvalue.hpp"
#include "cfg.hpp"
#include "coalesce.hpp"
#include "corpus.hpp"
#include "faultsim.hpp"
#include "ir.hpp"
#include "json_io.hpp"
#include "pruning.hpp"
#include "scheduler.hpp"

using namespace bitrel;

struct bitrel_program {
  Program prog;
};

// Owns a stable copy of the function plus every static analysis over it.
struct bitrel_analysis {
  Function fn;
  CFG cfg;
  AccessSets acc;
  DefUseIndex du;
  BitValueMap bv;
  CoalesceResult co;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_err(char** err, const std::string& msg) {
  if (err) *err = dup_string(msg);
}

int fail(char** err, int code, const std::string& msg) {
  set_err(err, msg);
  return code;
}

// Inputs for the static pipeline must match the analysis assumptions:
// only declared arguments may carry initial values.
int collect_inputs(const bitrel_analysis* a, const unsigned* regs,
                   const uint64_t* vals, size_t n, bool args_only,
                   std::vector<std::pair<unsigned, uint64_t>>& out,
                   char** err) {
  for (size_t i = 0; i < n; ++i) {
    if (regs[i] >= a->fn.nregs)
      return fail(err, BITREL_ERR_USAGE,
                  "input register r" + std::to_string(regs[i]) +
                      " out of range");
    if (vals[i] > a->fn.value_mask())
      return fail(err, BITREL_ERR_USAGE,
                  "input value " + std::to_string(vals[i]) +
                      " exceeds width " + std::to_string(a->fn.width));
    bool is_arg = false;
    for (unsigned arg : a->fn.args) is_arg = is_arg || arg == regs[i];
    if (args_only && !is_arg)
      return fail(err, BITREL_ERR_USAGE,
                  "r" + std::to_string(regs[i]) +
                      " is not a declared argument of " + a->fn.name);
    out.push_back({regs[i], vals[i]});
  }
  return BITREL_OK;
}

Trace golden_trace(const bitrel_analysis* a,
                   const std::vector<std::pair<unsigned, uint64_t>>& inputs,
                   long cycle_limit) {
  constexpr long kCap = 1'000'000;
  return execute(a->cfg, initial_regs(a->fn, inputs),
                 {}, cycle_limit > 0 ? cycle_limit : kCap);
}

}  // namespace

extern "C" {

void bitrel_free_string(char* s) { std::free(s); }

bitrel_program* bitrel_parse(const char* text, char** err) {
  try {
    auto result = parse_program(text ? text : "");
    if (auto* pe = std::get_if<ParseError>(&result)) {
      set_err(err, "line " + std::to_string(pe->line) + ": " + pe->message);
      return nullptr;
    }
    auto* p = new bitrel_program{std::get<Program>(std::move(result))};
    return p;
  } catch (const std::exception& e) {
    set_err(err, e.what());
    return nullptr;
  }
}

void bitrel_program_free(bitrel_program* p) { delete p; }

char* bitrel_program_print(const bitrel_program* p) {
  return dup_string(print_program(p->prog));
}

size_t bitrel_program_function_count(const bitrel_program* p) {
  return p->prog.functions.size();
}

char* bitrel_program_function_name(const bitrel_program* p, size_t index) {
  if (index >= p->prog.functions.size()) return nullptr;
  return dup_string(p->prog.functions[index].name);
}

unsigned bitrel_program_function_width(const bitrel_program* p, size_t index) {
  if (index >= p->prog.functions.size()) return 0;
  return p->prog.functions[index].width;
}

unsigned bitrel_program_function_regs(const bitrel_program* p, size_t index) {
  if (index >= p->prog.functions.size()) return 0;
  return p->prog.functions[index].nregs;
}

char* bitrel_gen_corpus_program(uint64_t seed, int index) {
  return dup_string(print_program(gen_corpus_program(seed, index).program));
}

bitrel_analysis* bitrel_analyze(const bitrel_program* p, const char* function,
                                char** err) {
  try {
    const Function* fn = nullptr;
    if (function) {
      fn = p->prog.find(function);
      if (!fn) {
        set_err(err, std::string("no function named ") + function);
        return nullptr;
      }
    } else if (!p->prog.functions.empty()) {
      fn = &p->prog.functions.front();
    } else {
      set_err(err, "program has no functions");
      return nullptr;
    }
    auto* a = new bitrel_analysis{*fn, {}, {}, {}, {}, {}};
    a->cfg = build_cfg(a->fn);
    a->acc = compute_access_sets(a->cfg);
    a->du = compute_def_use(a->cfg, a->acc);
    a->bv = analyze_bitvalues(a->cfg);
    a->co = coalesce(a->cfg, a->acc, a->du, a->bv);
    return a;
  } catch (const std::exception& e) {
    set_err(err, e.what());
    return nullptr;
  }
}

void bitrel_analysis_free(bitrel_analysis* a) { delete a; }

char* bitrel_analysis_bitvalues_json(const bitrel_analysis* a) {
  return dup_string(analyze_json(a->cfg, a->bv).dump(2));
}

char* bitrel_analysis_coalesce_json(const bitrel_analysis* a) {
  return dup_string(coalesce_json(a->cfg, a->co).dump(2));
}

int bitrel_simulate(const bitrel_analysis* a, const unsigned* in_regs,
                    const uint64_t* in_vals, size_t n_inputs,
                    const long* flip_cycles, const unsigned* flip_regs,
                    const unsigned* flip_bits, size_t n_flips,
                    long cycle_limit, char** out_trace, char** err) {
  try {
    std::vector<std::pair<unsigned, uint64_t>> inputs;
    // The interpreter itself has no argument restriction.
    if (int rc = collect_inputs(a, in_regs, in_vals, n_inputs, false, inputs,
                                err))
      return rc;
    std::vector<FaultSpec> flips;
    for (size_t i = 0; i < n_flips; ++i) {
      if (flip_regs[i] >= a->fn.nregs || flip_bits[i] >= a->fn.width ||
          flip_cycles[i] < 0)
        return fail(err, BITREL_ERR_USAGE, "flip out of range");
      flips.push_back({flip_cycles[i], flip_regs[i], flip_bits[i]});
    }
    long limit = cycle_limit;
    if (limit <= 0)
      limit = default_cycle_limit(golden_trace(a, inputs, 0));
    Trace t = execute(a->cfg, initial_regs(a->fn, inputs), flips, limit);
    *out_trace = dup_string(trace_json_lines(t));
    return BITREL_OK;
  } catch (const std::exception& e) {
    return fail(err, BITREL_ERR_INPUT, e.what());
  }
}

int bitrel_plan(const bitrel_analysis* a, const unsigned* in_regs,
                const uint64_t* in_vals, size_t n_inputs, int bec,
                long cycle_limit, char** out_plan, char** out_stats,
                char** err) {
  try {
    std::vector<std::pair<unsigned, uint64_t>> inputs;
    if (int rc =
            collect_inputs(a, in_regs, in_vals, n_inputs, true, inputs, err))
      return rc;
    Trace golden = golden_trace(a, inputs, cycle_limit);
    if (bec) {
      DynRelation rel = build_dynamic_relation(a->cfg, a->acc, golden, a->co);
      auto [plan, stats] =
          bec_prune_plan(a->cfg, a->acc, golden, rel, a->co);
      *out_plan = dup_string(plan_json(plan).dump(2));
      if (out_stats) *out_stats = dup_string(stats_json(stats).dump(2));
    } else {
      CampaignPlan plan = inject_on_read_plan(a->cfg, a->acc, golden);
      *out_plan = dup_string(plan_json(plan).dump(2));
      if (out_stats) {
        PruneStats stats;
        stats.live_in_values = stats.live_in_bits =
            static_cast<long>(plan.injections.size());
        stats.static_sites = static_site_stats(a->co);
        *out_stats = dup_string(stats_json(stats).dump(2));
      }
    }
    return BITREL_OK;
  } catch (const std::exception& e) {
    return fail(err, BITREL_ERR_INPUT, e.what());
  }
}

int bitrel_campaign(const bitrel_analysis* a, const unsigned* in_regs,
                    const uint64_t* in_vals, size_t n_inputs,
                    const char* plan_json_text, int jobs, long cycle_limit,
                    char** out_campaign, char** out_summary, char** err) {
  try {
    std::vector<std::pair<unsigned, uint64_t>> inputs;
    if (int rc =
            collect_inputs(a, in_regs, in_vals, n_inputs, true, inputs, err))
      return rc;
    Trace golden = golden_trace(a, inputs, cycle_limit);
    std::vector<DynamicFaultSite> sites;
    if (plan_json_text) {
      CampaignPlan plan =
          plan_from_json(ojson::parse(std::string(plan_json_text)));
      sites = plan.injections;
    } else {
      sites = inject_on_read_space(a->cfg, a->acc, golden);
    }
    auto t0 = std::chrono::steady_clock::now();
    Campaign c = run_campaign(a->cfg, initial_regs(a->fn, inputs), sites,
                              {jobs, cycle_limit});
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    *out_campaign = dup_string(campaign_json(c).dump(2));
    if (out_summary)
      *out_summary = dup_string(
          "runs=" + std::to_string(c.results.size()) +
          " classes=" + std::to_string(c.classes) +
          " distinct_traces=" + std::to_string(c.distinct_traces) +
          " jobs=" + std::to_string(jobs < 1 ? 1 : jobs) +
          " wall_ms=" + std::to_string(ms));
    return BITREL_OK;
  } catch (const std::exception& e) {
    return fail(err, BITREL_ERR_INPUT, e.what());
  }
}

int bitrel_expand(const char* plan_json_text, const char* campaign_json_text,
                  char** out_campaign, char** err) {
  try {
    ojson expanded =
        expand_campaign_json(ojson::parse(std::string(plan_json_text)),
                             ojson::parse(std::string(campaign_json_text)));
    *out_campaign = dup_string(expanded.dump(2));
    return BITREL_OK;
  } catch (const std::exception& e) {
    return fail(err, BITREL_ERR_INPUT, e.what());
  }
}

int bitrel_validate(const bitrel_analysis* a, const unsigned* in_regs,
                    const uint64_t* in_vals, size_t n_inputs, int jobs,
                    long cycle_limit, char** out_report, char** err) {
  try {
    std::vector<std::pair<unsigned, uint64_t>> inputs;
    if (int rc =
            collect_inputs(a, in_regs, in_vals, n_inputs, true, inputs, err))
      return rc;
    Trace golden = golden_trace(a, inputs, cycle_limit);
    std::vector<DynamicFaultSite> space =
        inject_on_read_space(a->cfg, a->acc, golden);
    Campaign c = run_campaign(a->cfg, initial_regs(a->fn, inputs), space,
                              {jobs, cycle_limit});
    DynRelation rel = build_dynamic_relation(a->cfg, a->acc, golden, a->co);
    ValidationReport rep = validate_equivalence(rel, c);
    *out_report = dup_string(validation_json(rep).dump(2));
    return rep.ok ? BITREL_OK : BITREL_ERR_UNSOUND;
  } catch (const std::exception& e) {
    return fail(err, BITREL_ERR_INPUT, e.what());
  }
}

int bitrel_schedule(const bitrel_analysis* a, const unsigned* in_regs,
                    const uint64_t* in_vals, size_t n_inputs,
                    const char* policy, long cycle_limit, char** out_program,
                    char** out_report, char** err) {
  try {
    std::string pol = policy ? policy : "best";
    if (pol != "best" && pol != "worst" && pol != "original")
      return fail(err, BITREL_ERR_USAGE, "unknown policy " + pol);
    std::vector<std::pair<unsigned, uint64_t>> inputs;
    if (int rc =
            collect_inputs(a, in_regs, in_vals, n_inputs, true, inputs, err))
      return rc;

    struct PolicyRun {
      Function fn;
      VulnerabilityReport vul;
      long plan_size = 0;
    };
    auto run_policy = [&](const std::string& name) {
      PolicyRun r;
      r.fn = name == "original"
                 ? a->fn
                 : reschedule_function(a->cfg, a->acc, a->co,
                                       name == "best" ? SchedPolicy::Best
                                                      : SchedPolicy::Worst);
      CFG cfg = build_cfg(r.fn);
      AccessSets acc = compute_access_sets(cfg);
      DefUseIndex du = compute_def_use(cfg, acc);
      BitValueMap bv = analyze_bitvalues(cfg);
      CoalesceResult co = coalesce(cfg, acc, du, bv);
      constexpr long kCap = 1'000'000;
      Trace golden = execute(cfg, initial_regs(r.fn, inputs), {},
                             cycle_limit > 0 ? cycle_limit : kCap);
      r.vul = vulnerability(cfg, acc, co, golden);
      r.plan_size =
          static_cast<long>(inject_on_read_space(cfg, acc, golden).size());
      return r;
    };
    PolicyRun original = run_policy("original");
    PolicyRun best = run_policy("best");
    PolicyRun worst = run_policy("worst");
    const PolicyRun& chosen =
        pol == "best" ? best : pol == "worst" ? worst : original;

    *out_program = dup_string(print_function(chosen.fn) + "\n");
    if (out_report) {
      ojson rep;
      rep["total_fault_space"] = original.vul.total_fault_space;
      rep["policies"] = ojson::object();
      auto policy_json = [](const PolicyRun& r) {
        return ojson{{"live_fault_sites", r.vul.live_fault_sites},
                     {"plan_size", r.plan_size}};
      };
      rep["policies"]["original"] = policy_json(original);
      rep["policies"]["best"] = policy_json(best);
      rep["policies"]["worst"] = policy_json(worst);
      rep["worst_best_ratio"] =
          best.vul.live_fault_sites == 0
              ? 0.0
              : static_cast<double>(worst.vul.live_fault_sites) /
                    static_cast<double>(best.vul.live_fault_sites);
      rep["plan_size_invariant"] = best.plan_size == original.plan_size &&
                                   worst.plan_size == original.plan_size;
      *out_report = dup_string(rep.dump(2));
    }
    return BITREL_OK;
  } catch (const std::exception& e) {
    return fail(err, BITREL_ERR_INPUT, e.what());
  }
}

}  // extern "C"
