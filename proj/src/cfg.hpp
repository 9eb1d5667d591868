// SPDX-License-Identifier: Apache-2.0
// Point-level control-flow graph, access sets, liveness and def-use chains.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ir.hpp"

namespace bitrel {

// Flattened per-instruction CFG. Point ids are textual order, so within a
// block point p is followed by p+1.
struct CFG {
  const Function* fn = nullptr;
  std::vector<const Instruction*> points;    // point id -> instruction
  std::vector<int> block_of;                 // point id -> block index
  std::vector<int> block_first;              // block index -> first point id
  std::vector<std::vector<int>> succ, pred;  // point-level edges
  std::vector<int> rpo;                      // point ids in reverse post-order

  int num_points() const { return static_cast<int>(points.size()); }
  const Instruction& instr(int p) const { return *points[p]; }
};

CFG build_cfg(const Function& fn);

// Registers as bitmasks (nregs <= 64).
struct AccessSets {
  std::vector<uint64_t> read;      // registers read at p (operand syntax)
  std::vector<uint64_t> write;     // register written at p
  std::vector<uint64_t> live_in;   // live before p
  std::vector<uint64_t> live_out;  // live after p
  std::vector<uint64_t> kill;      // accessed at p and not live-out

  uint64_t accessed(int p) const { return read[p] | write[p]; }
};

AccessSets compute_access_sets(const CFG& cfg);

// Def-use chains allowing multiple reaching definitions. The entry pseudo-def
// is encoded as point -1: it carries declared-argument values (and the
// undefined initial value of any other register).
struct DefUseIndex {
  // flowdef[p][v]: definition points whose value can reach the read of v at p.
  std::vector<std::vector<std::vector<int>>> flowdef;
  // flowuse[p][v]: read points of the value of v as of just after p.
  // Populated only where p accesses v (one entry per fault site).
  std::vector<std::vector<std::vector<int>>> flowuse;
  // entry_use[v]: read points of v's initial (entry) value.
  std::vector<std::vector<int>> entry_use;
  // Reads that may observe an undefined (non-argument) initial value.
  std::vector<std::pair<int, unsigned>> undefined_reads;
};

DefUseIndex compute_def_use(const CFG& cfg, const AccessSets& acc);

}  // namespace bitrel
