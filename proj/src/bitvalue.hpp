// SPDX-License-Identifier: Apache-2.0
// Forward MFP fixpoint over per-register abstract words.
#pragma once

#include <vector>

#include "bits.hpp"
#include "cfg.hpp"

namespace bitrel {

struct BitValueMap {
  // Indexed [point][register].
  std::vector<std::vector<AbsWord>> in_state, out_state;
  int raises = 0;  // strict lattice raises observed while iterating

  // Abstract value of v as the instruction at p reads it.
  const AbsWord& at_read(int p, unsigned v) const { return in_state[p][v]; }
  // Abstract value of v just after p executes.
  const AbsWord& after(int p, unsigned v) const { return out_state[p][v]; }

  friend bool operator==(const BitValueMap& a, const BitValueMap& b) {
    return a.in_state == b.in_state && a.out_state == b.out_state;
  }
};

// Abstract result of a value-producing instruction given the abstract values
// of its operands (immediates already widened to constant words).
AbsWord eval_value_result(const Instruction& ins, unsigned width,
                          const std::vector<AbsWord>& operands);

// Tri-valued taken/not-taken decision of a conditional branch.
Tri eval_branch_taken(Opcode op, const AbsWord& a, const AbsWord& b);

// Entry state: declared arguments unknown (top), everything else bottom.
std::vector<AbsWord> entry_state(const Function& fn);

// Runs the fixpoint. `order` optionally overrides the initial worklist order
// (default: reverse post-order); the result must not depend on it.
BitValueMap analyze_bitvalues(const CFG& cfg,
                              const std::vector<int>* order = nullptr);

}  // namespace bitrel
