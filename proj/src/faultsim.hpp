// SPDX-License-Identifier: Apache-2.0
// Concrete interpreter with single-event-upset injection, exhaustive
// campaigns over the dynamic fault space, and soundness validation of the
// static equivalence relation.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "cfg.hpp"
#include "coalesce.hpp"

namespace bitrel {

// Flip bit `bit` of register `reg` just before executing cycle `cycle`.
struct FaultSpec {
  long cycle = 0;
  unsigned reg = 0;
  unsigned bit = 0;
};

struct TraceEvent {
  long cycle = 0;
  int point = 0;
  std::optional<std::pair<unsigned, uint64_t>> write;  // at most one per event
  std::optional<bool> branch_taken;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

enum class TermStatus : uint8_t { Returned, CycleLimit };

struct Trace {
  std::vector<TraceEvent> events;
  TermStatus status = TermStatus::CycleLimit;
  uint64_t ret_value = 0;  // meaningful when status == Returned
  bool golden = false;

  long cycles() const { return static_cast<long>(events.size()); }
};

// Full equality: every event (including written values) plus terminal status.
bool trace_equal(const Trace& a, const Trace& b);

// Observable projection: executed points, branch decisions, terminal status
// and returned value. Write values are excluded so that a fault relocated
// across one def-use step (same downstream behavior, one differing
// intermediate write) classes with its image.
struct Hash128 {
  uint64_t a = 0, b = 0;
  friend auto operator<=>(const Hash128&, const Hash128&) = default;
};
Hash128 hash_full(const Trace& t);
Hash128 hash_observable(const Trace& t);

// Initial register file: zeros, then declared inputs.
std::vector<uint64_t> initial_regs(const Function& fn,
                                   const std::vector<std::pair<unsigned, uint64_t>>& inputs);

// One instruction per cycle; flips applied at the start of their cycle.
Trace execute(const CFG& cfg, std::vector<uint64_t> regs,
              const std::vector<FaultSpec>& flips, long cycle_limit);

inline long default_cycle_limit(const Trace& golden) {
  return 10 * golden.cycles();
}

// A planned injection: one executed read event of `reg` at `cycle`, bit
// `bit`; `read_point` is the program point executed at that cycle.
struct DynamicFaultSite {
  long cycle = 0;
  unsigned reg = 0;
  unsigned bit = 0;
  int read_point = 0;

  friend bool operator==(const DynamicFaultSite&,
                         const DynamicFaultSite&) = default;
};

// Inject-on-read fault space: every (read event, bit), ordered by
// (cycle, reg, bit). Operands naming one register twice yield one site.
std::vector<DynamicFaultSite> inject_on_read_space(const CFG& cfg,
                                                   const AccessSets& acc,
                                                   const Trace& golden);

// Occupancy interval of one register between consecutive accesses in the
// golden trace. A flip anywhere inside a window is first observed (if ever)
// at the window's closing read, so read-closed windows correspond 1:1 to
// inject-on-read sites.
struct DynWindow {
  unsigned reg = 0;
  long open_cycle = -1;  // -1: open since function entry
  int open_point = -1;   // the access that opened the window (-1: entry)
  long close_cycle = -1;  // -1: still open at termination
  int close_point = -1;
  bool close_is_read = false;
};

struct WindowMap {
  std::vector<DynWindow> windows;
  std::map<std::pair<long, unsigned>, int> closed_by_read;  // (cycle, reg)
  std::map<std::pair<long, unsigned>, int> opened_at;       // (cycle, reg)

  int window_of_read(long cycle, unsigned reg) const {
    return closed_by_read.at({cycle, reg});
  }
};

WindowMap build_windows(const CFG& cfg, const AccessSets& acc,
                        const Trace& golden);

// Static equivalence mirrored onto dynamic window instances. Node 0 is the
// dynamic masked class; node of (window k, bit i) is 1 + k*w + i.
struct DynRelation {
  WindowMap windows;
  EquivRelation uf{1};
  unsigned width = 0;
  std::vector<int> anchor_site;  // per window: static site id of bit 0, or -1
  std::vector<bool> relocated_node;  // touched by a relocation fact
  std::vector<bool> relocated_root;  // class (by root) contains such a node

  int node(int window, unsigned bit) const {
    return 1 + window * static_cast<int>(width) + static_cast<int>(bit);
  }
  int node_of_site(const DynamicFaultSite& s) const {
    return node(windows.window_of_read(s.cycle, s.reg), s.bit);
  }
  bool masked(const DynamicFaultSite& s) const {
    return uf.same(0, node_of_site(s));
  }
  // Classes never touched by a relocation carry a stronger guarantee:
  // members have byte-identical full traces (including write values).
  bool relocated_class(const DynamicFaultSite& s) const {
    return relocated_root[uf.find(node_of_site(s))];
  }
};

DynRelation build_dynamic_relation(const CFG& cfg, const AccessSets& acc,
                                   const Trace& golden,
                                   const CoalesceResult& co);

struct RunRecord {
  DynamicFaultSite site;
  int class_id = -1;       // observable class; 0 = golden behavior
  bool equals_golden = false;  // full-trace equality with the golden run
  Hash128 observable, full;
};

struct Campaign {
  Trace golden;
  std::vector<RunRecord> results;
  int classes = 0;            // distinct observable classes among results
  long distinct_traces = 0;   // distinct full traces among results
};

struct CampaignOptions {
  int jobs = 1;
  long cycle_limit = 0;  // 0: 10x golden length
};

Campaign run_campaign(const CFG& cfg, const std::vector<uint64_t>& regs0,
                      const std::vector<DynamicFaultSite>& plan,
                      const CampaignOptions& opt);

// Pair accounting over the campaign's sites: predicted equivalence = shared
// dynamic class, observed equivalence = shared observable class.
struct ValidationReport {
  long sites = 0;
  long pairs_sound_precise = 0;    // same class, same behavior
  long pairs_sound_imprecise = 0;  // different class, same behavior
  long pairs_unsound = 0;          // same class, different behavior
  long pairs_distinct = 0;         // different class, different behavior
  long masked_sites = 0;       // sites in the dynamic masked class
  long masked_mismatches = 0;  // masked but observably not golden behavior
  bool ok = false;

  friend bool operator==(const ValidationReport&,
                         const ValidationReport&) = default;
};

ValidationReport validate_equivalence(const DynRelation& rel,
                                      const Campaign& campaign);

}  // namespace bitrel
