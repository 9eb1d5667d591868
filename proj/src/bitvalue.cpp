// SPDX-License-Identifier: Apache-2.0
#include "bitvalue.hpp"

#include <cassert>
#include <deque>

namespace bitrel {

AbsWord eval_value_result(const Instruction& ins, unsigned width,
                          const std::vector<AbsWord>& ops) {
  switch (ins.opcode) {
    case Opcode::Li:
    case Opcode::Mv:
      return ops[0];
    case Opcode::And:
      return tr_and(ops[0], ops[1]);
    case Opcode::Or:
      return tr_or(ops[0], ops[1]);
    case Opcode::Xor:
      return tr_xor(ops[0], ops[1]);
    case Opcode::Add:
      return tr_add(ops[0], ops[1]);
    case Opcode::Sub:
      return tr_sub(ops[0], ops[1]);
    case Opcode::Shl:
      return tr_shl(ops[0], ops[1]);
    case Opcode::Shr:
      return tr_shr(ops[0], ops[1]);
    case Opcode::Seqz:
      return tr_seqz(ops[0]);
    case Opcode::Snez:
      return tr_snez(ops[0]);
    case Opcode::Slt:
      return tr_slt(ops[0], ops[1]);
    default:
      assert(false && "not a value-producing opcode");
      return AbsWord(width, AbsBit::Top);
  }
}

Tri eval_branch_taken(Opcode op, const AbsWord& a, const AbsWord& b) {
  switch (op) {
    case Opcode::Beq:
      return cmp_eq(a, b);
    case Opcode::Bne: {
      Tri t = cmp_eq(a, b);
      if (t == Tri::Unknown) return t;
      return t == Tri::True ? Tri::False : Tri::True;
    }
    case Opcode::Blt:
      return cmp_ult(a, b);
    case Opcode::Bge: {
      Tri t = cmp_ult(a, b);
      if (t == Tri::Unknown) return t;
      return t == Tri::True ? Tri::False : Tri::True;
    }
    default:
      assert(false && "not a conditional branch");
      return Tri::Unknown;
  }
}

std::vector<AbsWord> entry_state(const Function& fn) {
  std::vector<AbsWord> st(fn.nregs, AbsWord(fn.width, AbsBit::Bot));
  for (unsigned a : fn.args) st[a] = AbsWord(fn.width, AbsBit::Top);
  return st;
}

namespace {

std::vector<AbsWord> operand_values(const Instruction& ins, unsigned width,
                                    const std::vector<AbsWord>& regs) {
  std::vector<AbsWord> ops;
  ops.reserve(ins.srcs.size());
  for (const Operand& o : ins.srcs)
    ops.push_back(o.is_reg ? regs[o.value] : AbsWord::constant(width, o.value));
  return ops;
}

std::vector<AbsWord> transfer(const Instruction& ins, unsigned width,
                              std::vector<AbsWord> st) {
  if (ins.dst)
    st[*ins.dst] = eval_value_result(ins, width, operand_values(ins, width, st));
  return st;
}

}  // namespace

BitValueMap analyze_bitvalues(const CFG& cfg, const std::vector<int>* order) {
  const Function& fn = *cfg.fn;
  int n = cfg.num_points();
  unsigned w = fn.width, m = fn.nregs;
  BitValueMap bv;
  std::vector<AbsWord> bot(m, AbsWord(w, AbsBit::Bot));
  bv.in_state.assign(n, bot);
  bv.out_state.assign(n, bot);
  std::vector<AbsWord> initial = entry_state(fn);

  std::deque<int> work(order ? order->begin() : cfg.rpo.begin(),
                       order ? order->end() : cfg.rpo.end());
  std::vector<bool> queued(n, true);
  // Each in-state bit can rise at most twice (bot -> known -> top).
  const long raise_bound = 2L * n * m * w;
  while (!work.empty()) {
    int p = work.front();
    work.pop_front();
    queued[p] = false;
    std::vector<AbsWord> in = (p == 0) ? initial : bot;
    for (int q : cfg.pred[p])
      for (unsigned v = 0; v < m; ++v) in[v] = meet(in[v], bv.out_state[q][v]);
    for (unsigned v = 0; v < m; ++v)
      for (unsigned i = 0; i < w; ++i) {
        AbsBit o = bv.in_state[p][v].get(i), nu = in[v].get(i);
        if (o != nu) {
          assert(leq(o, nu) && "in-state must only rise");
          ++bv.raises;
        }
      }
    assert(bv.raises <= raise_bound && "fixpoint exceeded raise bound");
    bv.in_state[p] = in;
    std::vector<AbsWord> out = transfer(cfg.instr(p), w, std::move(in));
    if (out != bv.out_state[p]) {
      bv.out_state[p] = std::move(out);
      for (int s : cfg.succ[p])
        if (!queued[s]) {
          queued[s] = true;
          work.push_back(s);
        }
    }
  }
  return bv;
}

}  // namespace bitrel
