// SPDX-License-Identifier: Apache-2.0
// Reliability-aware list scheduling: per-block dependency DAG, a priority
// score counting bit-level fault sites retired per instruction, and the
// trace-summed live-fault-site vulnerability metric.
#pragma once

#include <vector>

#include "coalesce.hpp"
#include "faultsim.hpp"

namespace bitrel {

// Register-hazard DAG over one block's instructions (local indices). A
// terminating branch/jmp/ret is additionally ordered after every other node
// so that any topological order is a valid block body.
struct DependencyDAG {
  int block = 0;
  std::vector<std::vector<int>> preds, succs;
  bool pinned_terminator = false;

  int size() const { return static_cast<int>(preds.size()); }
};

DependencyDAG build_block_dag(const CFG& cfg, const AccessSets& acc,
                              int block);

enum class SchedPolicy : uint8_t { Best, Worst };

// Net fault-site retirement of the block-local instruction at `local`,
// evaluated on the original order: width w per register value whose last
// read it performs (value then dead or rewritten), minus the statically
// unmasked bits of the value it defines (dead definitions cost zero).
long retirement_score(const CFG& cfg, const AccessSets& acc,
                      const CoalesceResult& co, int block, int local);

// Greedy list schedule. Returns block-local instruction indices in the new
// order; ties broken by original position.
std::vector<int> schedule_block(const CFG& cfg, const AccessSets& acc,
                                const CoalesceResult& co, int block,
                                SchedPolicy policy);

// Reorders every block; block structure, labels and terminators unchanged.
Function reschedule_function(const CFG& cfg, const AccessSets& acc,
                             const CoalesceResult& co, SchedPolicy policy);

struct VulnerabilityReport {
  long total_fault_space = 0;  // executed cycles x registers x width
  long live_fault_sites = 0;   // sum over cycles of unmasked live bits

  friend bool operator==(const VulnerabilityReport&,
                         const VulnerabilityReport&) = default;
};

// For every executed cycle: bits of registers holding a value still needed
// by the continuation, excluding bits whose covering fault site is in the
// static masked class. The value consumed by ret counts at the ret cycle.
VulnerabilityReport vulnerability(const CFG& cfg, const AccessSets& acc,
                                  const CoalesceResult& co,
                                  const Trace& golden);

}  // namespace bitrel
