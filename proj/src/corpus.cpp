// SPDX-License-Identifier: Apache-2.0
#include "corpus.hpp"

#include <cassert>
#include <string>

namespace bitrel {

namespace {

struct Gen {
  SplitMix rng;
  unsigned w = 4;
  unsigned m = 4;
  uint64_t defined = 0;  // registers holding a defined value
  std::vector<unsigned> args;
  int forbidden_dst = -1;  // loop counter; never overwritten by body ops

  explicit Gen(uint64_t seed) : rng(seed) {}

  unsigned pick_defined() {
    std::vector<unsigned> cand;
    for (unsigned v = 0; v < m; ++v)
      if (defined >> v & 1) cand.push_back(v);
    assert(!cand.empty());
    return cand[rng.below(cand.size())];
  }
  unsigned pick_dst() {
    unsigned d;
    do
      d = static_cast<unsigned>(rng.below(m));
    while (static_cast<int>(d) == forbidden_dst);
    return d;
  }
  uint64_t imm() { return rng.below(1ull << w); }

  Instruction value_op() {
    Instruction ins;
    // Weighted toward mask/shift idioms so static masking has bite.
    unsigned roll = static_cast<unsigned>(rng.below(16));
    unsigned a = pick_defined();
    if (roll < 3) {  // and with immediate mask
      ins.opcode = Opcode::And;
      ins.srcs = {Operand::reg(a), Operand::imm(imm())};
    } else if (roll < 5) {  // shift by constant
      ins.opcode = roll == 3 ? Opcode::Shl : Opcode::Shr;
      ins.srcs = {Operand::reg(a), Operand::imm(rng.below(w))};
    } else if (roll < 7) {
      ins.opcode = roll == 5 ? Opcode::And : Opcode::Or;
      ins.srcs = {Operand::reg(a), Operand::reg(pick_defined())};
    } else if (roll < 9) {
      ins.opcode = Opcode::Xor;
      bool use_imm = rng.below(2) == 0;
      ins.srcs = {Operand::reg(a), use_imm ? Operand::imm(imm())
                                           : Operand::reg(pick_defined())};
    } else if (roll < 11) {
      ins.opcode = roll == 9 ? Opcode::Add : Opcode::Sub;
      bool use_imm = rng.below(2) == 0;
      ins.srcs = {Operand::reg(a), use_imm ? Operand::imm(imm())
                                           : Operand::reg(pick_defined())};
    } else if (roll < 12) {
      ins.opcode = Opcode::Li;
      ins.srcs = {Operand::imm(imm())};
    } else if (roll < 13) {
      ins.opcode = Opcode::Mv;
      ins.srcs = {Operand::reg(a)};
    } else if (roll < 14) {
      ins.opcode = rng.below(2) == 0 ? Opcode::Seqz : Opcode::Snez;
      ins.srcs = {Operand::reg(a)};
    } else if (roll < 15) {
      ins.opcode = Opcode::Slt;
      ins.srcs = {Operand::reg(a), Operand::reg(pick_defined())};
    } else {
      ins.opcode = Opcode::Or;
      ins.srcs = {Operand::reg(a), Operand::imm(imm())};
    }
    unsigned d = pick_dst();
    ins.dst = d;
    defined |= 1ull << d;
    return ins;
  }

  Instruction mask_idiom() {
    Instruction ins;
    unsigned roll = static_cast<unsigned>(rng.below(3));
    ins.opcode = roll == 0 ? Opcode::And : roll == 1 ? Opcode::Shl
                                                     : Opcode::Shr;
    uint64_t k = ins.opcode == Opcode::And ? imm() : rng.below(w);
    ins.srcs = {Operand::reg(pick_defined()), Operand::imm(k)};
    unsigned d = pick_dst();
    ins.dst = d;
    defined |= 1ull << d;
    return ins;
  }

  Instruction li_init(unsigned d) {
    Instruction ins;
    ins.opcode = Opcode::Li;
    ins.dst = d;
    ins.srcs = {Operand::imm(imm())};
    defined |= 1ull << d;
    return ins;
  }

  Instruction cond_branch(const std::string& target) {
    Instruction ins;
    unsigned roll = static_cast<unsigned>(rng.below(4));
    ins.opcode = roll == 0   ? Opcode::Beq
                 : roll == 1 ? Opcode::Bne
                 : roll == 2 ? Opcode::Blt
                             : Opcode::Bge;
    bool use_imm = rng.below(2) == 0;
    ins.srcs = {Operand::reg(pick_defined()),
                use_imm ? Operand::imm(imm()) : Operand::reg(pick_defined())};
    ins.target = target;
    return ins;
  }

  Instruction ret() {
    Instruction ins;
    ins.opcode = Opcode::Ret;
    ins.srcs = {Operand::reg(pick_defined())};
    return ins;
  }

  Instruction jmp(const std::string& target) {
    Instruction ins;
    ins.opcode = Opcode::Jmp;
    ins.target = target;
    return ins;
  }
};

void renumber(Function& fn) {
  int point = 0;
  for (Block& b : fn.blocks)
    for (Instruction& ins : b.instrs) ins.point = point++;
}

}  // namespace

GenProgram gen_corpus_program(uint64_t seed, int index) {
  // Decorrelate (seed, index) pairs before seeding the generator stream.
  SplitMix mixer(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
  Gen g(mixer.next());
  GenProgram out;

  g.w = g.rng.below(2) == 0 ? 4 : 8;
  g.m = 4;
  Function fn;
  fn.name = "gen" + std::to_string(index);
  fn.width = g.w;
  fn.nregs = g.m;

  if (g.rng.below(4) == 0) {
    fn.args = g.rng.below(2) == 0 ? std::vector<unsigned>{1}
                                  : std::vector<unsigned>{1, 2};
    for (unsigned a : fn.args) {
      g.defined |= 1ull << a;
      out.inputs.push_back({a, g.rng.below(1ull << g.w)});
    }
    g.args = fn.args;
  }

  bool force_idiom = index % 2 == 0;
  unsigned shape = static_cast<unsigned>(g.rng.below(10));

  Block entry;
  entry.label = "entry";
  for (unsigned v = 0; v < g.m; ++v)
    if (!(g.defined >> v & 1)) entry.instrs.push_back(g.li_init(v));

  if (shape < 3) {  // straight line
    unsigned n = 3 + static_cast<unsigned>(g.rng.below(10));
    for (unsigned i = 0; i < n; ++i) entry.instrs.push_back(g.value_op());
    if (force_idiom) entry.instrs.push_back(g.mask_idiom());
    entry.instrs.push_back(g.ret());
    fn.blocks = {entry};
  } else if (shape < 6) {  // diamond: entry -> (left | right) -> join
    unsigned n = 2 + static_cast<unsigned>(g.rng.below(4));
    for (unsigned i = 0; i < n; ++i) entry.instrs.push_back(g.value_op());
    if (force_idiom) entry.instrs.push_back(g.mask_idiom());
    entry.instrs.push_back(g.cond_branch("right"));
    uint64_t at_branch = g.defined;

    Block left;  // fallthrough arm
    left.label = "left";
    g.defined = at_branch;
    for (unsigned i = 0, k = 1 + static_cast<unsigned>(g.rng.below(4)); i < k;
         ++i)
      left.instrs.push_back(g.value_op());
    left.instrs.push_back(g.jmp("join"));

    Block right;  // taken arm, falls through to join
    right.label = "right";
    g.defined = at_branch;
    for (unsigned i = 0, k = 1 + static_cast<unsigned>(g.rng.below(4)); i < k;
         ++i)
      right.instrs.push_back(g.value_op());

    Block join;
    join.label = "join";
    g.defined = at_branch;  // only pre-branch values are defined on both arms
    for (unsigned i = 0, k = 1 + static_cast<unsigned>(g.rng.below(4)); i < k;
         ++i)
      join.instrs.push_back(g.value_op());
    join.instrs.push_back(g.ret());
    fn.blocks = {entry, left, right, join};
  } else {  // bounded counter loop
    unsigned counter = g.pick_dst();
    uint64_t trip = 2 + g.rng.below(7);
    Instruction init;
    init.opcode = Opcode::Li;
    init.dst = counter;
    init.srcs = {Operand::imm(trip)};
    g.defined |= 1ull << counter;
    entry.instrs.push_back(init);

    Block loop;
    loop.label = "loop";
    g.forbidden_dst = static_cast<int>(counter);
    unsigned n = 3 + static_cast<unsigned>(g.rng.below(6));
    for (unsigned i = 0; i < n; ++i) loop.instrs.push_back(g.value_op());
    if (force_idiom) loop.instrs.push_back(g.mask_idiom());
    g.forbidden_dst = -1;
    Instruction dec;
    dec.opcode = Opcode::Sub;
    dec.dst = counter;
    dec.srcs = {Operand::reg(counter), Operand::imm(1)};
    loop.instrs.push_back(dec);
    Instruction back;
    back.opcode = Opcode::Bne;
    back.srcs = {Operand::reg(counter), Operand::imm(0)};
    back.target = "loop";
    loop.instrs.push_back(back);

    Block exit;
    exit.label = "exit";
    if (g.rng.below(2) == 0) exit.instrs.push_back(g.value_op());
    exit.instrs.push_back(g.ret());
    fn.blocks = {entry, loop, exit};
  }

  renumber(fn);
  assert(fn.num_points() <= 30);
  out.program.functions = {std::move(fn)};
  return out;
}

std::vector<GenProgram> gen_corpus(uint64_t seed, int count) {
  std::vector<GenProgram> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(gen_corpus_program(seed, i));
  return out;
}

bool has_mask_idiom(const Function& fn) {
  for (const Block& b : fn.blocks)
    for (const Instruction& ins : b.instrs) {
      bool mask_op = ins.opcode == Opcode::And || ins.opcode == Opcode::Shl ||
                     ins.opcode == Opcode::Shr;
      if (mask_op && ins.srcs.size() == 2 && !ins.srcs[1].is_reg) return true;
    }
  return false;
}

}  // namespace bitrel
