// SPDX-License-Identifier: Apache-2.0
// Deterministic random-program generator for campaign-scale validation:
// small, terminating, undefined-read-free programs biased toward mask and
// shift idioms.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ir.hpp"

namespace bitrel {

struct GenProgram {
  Program program;  // exactly one function, named gen<index>
  std::vector<std::pair<unsigned, uint64_t>> inputs;  // declared-arg values
};

// Fully determined by (seed, index); every even index contains at least one
// and/shl/shr masking instruction. Programs have at most 30 points, width 4
// or 8, 4 registers, and loop trip counts small enough that an exhaustive
// inject-on-read campaign stays under 10^4 runs.
GenProgram gen_corpus_program(uint64_t seed, int index);

std::vector<GenProgram> gen_corpus(uint64_t seed, int count);

// True if the function contains an and/shl/shr with immediate operand.
bool has_mask_idiom(const Function& fn);

// splitmix64; the sole RNG used for generation.
struct SplitMix {
  uint64_t state;
  explicit SplitMix(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d4a2c62eb4d04full;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t n) { return next() % n; }
};

}  // namespace bitrel
