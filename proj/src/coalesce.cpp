// SPDX-License-Identifier: Apache-2.0
#include "coalesce.hpp"

#include <algorithm>
#include <cassert>

namespace bitrel {

std::string SiteTable::name(int id) const {
  if (id == kMaskedElem) return "s0";
  const Site& s = sites[id];
  std::string r = "r" + std::to_string(s.reg) + ":" + std::to_string(s.bit);
  if (s.point < 0) return "arg:" + r;
  return "p" + std::to_string(s.point) + ":" + r;
}

SiteTable enumerate_sites(const CFG& cfg, const AccessSets& acc) {
  const Function& fn = *cfg.fn;
  SiteTable t;
  t.sites.push_back({-2, 0, 0});  // sentinel for the masked element
  auto add = [&](int point, unsigned reg, unsigned bit) {
    t.ids[{point, reg, bit}] = t.count();
    t.sites.push_back({point, reg, bit});
  };
  std::vector<unsigned> args(fn.args.begin(), fn.args.end());
  std::sort(args.begin(), args.end());
  for (unsigned a : args)
    for (unsigned i = 0; i < fn.width; ++i) add(-1, a, i);
  for (int p = 0; p < cfg.num_points(); ++p)
    for (unsigned v = 0; v < fn.nregs; ++v)
      if (acc.accessed(p) >> v & 1)
        for (unsigned i = 0; i < fn.width; ++i) add(p, v, i);
  return t;
}

int EquivRelation::find(int x) const {
  int root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) x = std::exchange(parent_[x], root);
  return root;
}

bool EquivRelation::merge(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  // Lower id wins so the representative is the smallest member.
  if (a > b) std::swap(a, b);
  parent_[b] = a;
  return true;
}

int EquivRelation::class_count() const {
  int n = 0;
  for (int i = 0; i < size(); ++i) n += find(i) == i;
  return n;
}

std::vector<std::vector<int>> EquivRelation::classes() const {
  std::map<int, std::vector<int>> by_root;
  for (int i = 0; i < size(); ++i) by_root[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [root, members] : by_root) out.push_back(std::move(members));
  return out;
}

bool operator==(const EquivRelation& a, const EquivRelation& b) {
  if (a.size() != b.size()) return false;
  for (int i = 0; i < a.size(); ++i)
    if (a.find(i) != b.find(i)) return false;
  return true;
}

EquivRelation init_fault_indices(const SiteTable& table, const CFG& cfg,
                                 const AccessSets& acc) {
  EquivRelation rel(table.count());
  for (int id = 1; id < table.count(); ++id) {
    const SiteTable::Site& s = table.sites[id];
    bool dead = s.point < 0 ? !(acc.live_in[0] >> s.reg & 1)
                            : (acc.kill[s.point] >> s.reg & 1) != 0;
    if (dead) rel.merge(kMaskedElem, id);
  }
  return rel;
}

namespace {

bool usable(const AbsWord& w) { return !w.has_bot(); }

// Branch/comparator outcome given operand words. Operands of one register
// always hold the same value, so reg-identical comparisons are decided
// without looking at bits.
Outcome outcome_of(const Instruction& ins, unsigned width,
                   const std::vector<AbsWord>& ops) {
  Outcome o;
  bool same_reg = ins.srcs.size() == 2 && ins.srcs[0].is_reg &&
                  ins.srcs[1].is_reg &&
                  ins.srcs[0].value == ins.srcs[1].value;
  if (is_cond_branch(ins.opcode)) {
    Tri t;
    if (same_reg) {
      t = (ins.opcode == Opcode::Beq || ins.opcode == Opcode::Bge)
              ? Tri::True
              : Tri::False;
    } else if (!usable(ops[0]) || !usable(ops[1])) {
      return o;
    } else {
      t = eval_branch_taken(ins.opcode, ops[0], ops[1]);
    }
    if (t == Tri::True) o.kind = Outcome::Kind::Taken;
    if (t == Tri::False) o.kind = Outcome::Kind::NotTaken;
    return o;
  }
  if (same_reg && ins.opcode == Opcode::Slt) {
    o.kind = Outcome::Kind::Value;
    o.value = 0;
    return o;
  }
  for (const AbsWord& op : ops)
    if (!usable(op)) return o;
  AbsWord r = eval_value_result(ins, width, ops);
  if (r.all_known()) {
    o.kind = Outcome::Kind::Value;
    o.value = r.known_value();
  }
  return o;
}

bool is_comparator(Opcode op) {
  return is_cond_branch(op) || op == Opcode::Slt || op == Opcode::Seqz ||
         op == Opcode::Snez;
}

std::vector<Port> ports_for(const CFG& cfg, const BitValueMap& bv, int q,
                            unsigned v) {
  const Function& fn = *cfg.fn;
  const unsigned w = fn.width;
  const Instruction& ins = cfg.instr(q);
  std::vector<Port> ports(w);
  auto word_of = [&](const Operand& o) {
    return o.is_reg ? bv.at_read(q, o.value) : AbsWord::constant(w, o.value);
  };
  auto dst_all = [&](auto f) {
    for (unsigned i = 0; i < w; ++i) {
      ports[i].ground = Port::Ground::DstBit;
      ports[i].dst_bit = f(i);
    }
  };

  switch (ins.opcode) {
    case Opcode::Mv:
      dst_all([](unsigned i) { return i; });
      break;
    case Opcode::Xor: {
      bool same = ins.srcs[0].is_reg && ins.srcs[1].is_reg &&
                  ins.srcs[0].value == ins.srcs[1].value;
      if (same) {
        // Both operand occurrences flip: the result is unchanged.
        for (auto& p : ports) p.ground = Port::Ground::Masked;
      } else {
        dst_all([](unsigned i) { return i; });
      }
      break;
    }
    case Opcode::And:
    case Opcode::Or: {
      bool same = ins.srcs[0].is_reg && ins.srcs[1].is_reg &&
                  ins.srcs[0].value == ins.srcs[1].value;
      if (same) {
        dst_all([](unsigned i) { return i; });
        break;
      }
      // The flip propagates iff the other operand's bit passes it through,
      // and is absorbed iff that bit dominates the result.
      const Operand& other = (ins.srcs[0].is_reg && ins.srcs[0].value == v)
                                 ? ins.srcs[1]
                                 : ins.srcs[0];
      AbsWord ow = word_of(other);
      AbsBit pass = ins.opcode == Opcode::And ? AbsBit::One : AbsBit::Zero;
      AbsBit absorb = ins.opcode == Opcode::And ? AbsBit::Zero : AbsBit::One;
      for (unsigned i = 0; i < w; ++i) {
        if (ow.get(i) == pass) {
          ports[i].ground = Port::Ground::DstBit;
          ports[i].dst_bit = i;
        } else if (ow.get(i) == absorb) {
          ports[i].ground = Port::Ground::Masked;
        }
      }
      break;
    }
    case Opcode::Shl:
    case Opcode::Shr: {
      const Operand& val = ins.srcs[0];
      const Operand& amt = ins.srcs[1];
      bool v_is_val = val.is_reg && val.value == v;
      bool v_is_amt = amt.is_reg && amt.value == v;
      if (!v_is_val || v_is_amt) break;  // amount-side flips: no rule
      AbsWord aw = word_of(amt);
      if (aw.has_bot()) break;
      uint64_t lo = min_unsigned(aw);
      bool left = ins.opcode == Opcode::Shl;
      for (unsigned i = 0; i < w; ++i) {
        bool out_for_all = left ? (i + lo >= w) : (i < lo);
        if (out_for_all) {
          ports[i].ground = Port::Ground::Masked;
        } else if (aw.all_known()) {
          uint64_t k = aw.known_value();
          ports[i].ground = Port::Ground::DstBit;
          ports[i].dst_bit = left ? static_cast<unsigned>(i + k)
                                  : static_cast<unsigned>(i - k);
        }
      }
      break;
    }
    case Opcode::Seqz:
    case Opcode::Snez:
    case Opcode::Slt:
    case Opcode::Beq:
    case Opcode::Bne:
    case Opcode::Blt:
    case Opcode::Bge: {
      std::vector<AbsWord> golden_ops;
      for (const Operand& o : ins.srcs) golden_ops.push_back(word_of(o));
      Outcome golden = outcome_of(ins, w, golden_ops);
      for (unsigned i = 0; i < w; ++i) {
        AbsWord flipped = bv.at_read(q, v);
        flipped.set(i, flip(flipped.get(i)));
        std::vector<AbsWord> ops;
        for (const Operand& o : ins.srcs)
          ops.push_back(o.is_reg && o.value == v ? flipped : word_of(o));
        ports[i].outcome = outcome_of(ins, w, ops);
        if (ports[i].outcome.known() && golden.known() &&
            ports[i].outcome == golden)
          ports[i].ground = Port::Ground::Masked;
      }
      break;
    }
    case Opcode::Li:
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Jmp:
    case Opcode::Ret:
      break;  // no flip-propagation rule: fresh classes persist
  }
  return ports;
}

}  // namespace

PortMap compute_ports(const CFG& cfg, const AccessSets& acc,
                      const BitValueMap& bv) {
  PortMap pm;
  for (int q = 0; q < cfg.num_points(); ++q)
    for (unsigned v = 0; v < cfg.fn->nregs; ++v)
      if (acc.read[q] >> v & 1) pm.at[{q, v}] = ports_for(cfg, bv, q, v);
  return pm;
}

bool inter_merge_sweep(const SiteTable& table, const CFG& cfg,
                       const AccessSets& acc, const DefUseIndex& du,
                       const PortMap& ports, EquivRelation& rel,
                       std::vector<MergeFact>* record) {
  const Function& fn = *cfg.fn;
  const unsigned w = fn.width;
  bool changed = false;
  auto uses_of = [&](int point, unsigned v) -> const std::vector<int>& {
    return point < 0 ? du.entry_use[v] : du.flowuse[point][v];
  };
  // The value occupying v after q is a different value instance than the one
  // q read: either q rewrote v or v's old value is dead there.
  auto ends_window = [&](int q, unsigned v) {
    return ((acc.write[q] | acc.kill[q]) >> v & 1) != 0;
  };

  for (int id = 1; id < table.count(); id += w) {
    const int point = table.sites[id].point;
    const unsigned v = table.sites[id].reg;
    assert(table.sites[id].bit == 0 && "sites laid out per-anchor");
    const std::vector<int>& uses = uses_of(point, v);
    if (uses.empty()) continue;

    for (unsigned i = 0; i < w; ++i) {
      int s = id + static_cast<int>(i);
      // Absorbed at every read of this value: masked.
      bool all_masked = true;
      for (int q : uses)
        if (ports.get(q, v, i).ground != Port::Ground::Masked) {
          all_masked = false;
          break;
        }
      if (all_masked) {
        changed |= rel.merge(kMaskedElem, s);
        continue;
      }
      // Single read that relocates the flip into the written destination and
      // leaves no live residue behind: the fault index moves to the dst bit.
      if (uses.size() == 1) {
        int q = uses[0];
        const Port& pt = ports.get(q, v, i);
        if (pt.ground == Port::Ground::DstBit && ends_window(q, v)) {
          int t = table.id_of(q, *cfg.instr(q).dst, pt.dst_bit);
          assert(t > 0);
          changed |= rel.merge(s, t);
          if (record)
            record->push_back({MergeFact::Kind::UseGroundSite, s, t, q});
        }
      }
    }
    // Two bits with provably identical machine effect at every read of this
    // value are interchangeable fault sites.
    for (unsigned i = 0; i + 1 < w; ++i)
      for (unsigned j = i + 1; j < w; ++j) {
        bool agree = true;
        for (int q : uses) {
          const Port& a = ports.get(q, v, i);
          const Port& b = ports.get(q, v, j);
          bool ok = (a.outcome.known() && b.outcome.known() &&
                     a.outcome == b.outcome) ||
                    (a.ground == Port::Ground::Masked &&
                     b.ground == Port::Ground::Masked);
          if (!ok) {
            agree = false;
            break;
          }
        }
        if (agree) {
          changed |= rel.merge(id + static_cast<int>(i), id + static_cast<int>(j));
          if (record)
            record->push_back({MergeFact::Kind::PortPair,
                               id + static_cast<int>(i),
                               id + static_cast<int>(j), -1});
        }
      }
  }
  return changed;
}

CoalesceResult coalesce(const CFG& cfg, const AccessSets& acc,
                        const DefUseIndex& du, const BitValueMap& bv) {
  CoalesceResult res;
  res.table = enumerate_sites(cfg, acc);
  res.rel = init_fault_indices(res.table, cfg, acc);
  PortMap ports = compute_ports(cfg, acc, bv);
  bool changed = true;
  while (changed) {
    std::vector<MergeFact>* rec = res.sweeps == 0 ? &res.facts : nullptr;
    changed = inter_merge_sweep(res.table, cfg, acc, du, ports, res.rel, rec);
    ++res.sweeps;
    assert(res.sweeps <= res.table.count() + 1 && "coalescing failed to settle");
  }
  return res;
}

}  // namespace bitrel
