// SPDX-License-Identifier: Apache-2.0
#include "faultsim.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>

namespace bitrel {

namespace {

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d4a2c62eb4d04full;
  return x ^ (x >> 31);
}

// Two independently seeded mix lanes; collisions across 2^128 states are not
// a practical concern for campaign sizes here.
struct Hasher {
  Hash128 h{0x6a09e667f3bcc908ull, 0xbb67ae8584caa73bull};
  void feed(uint64_t v) {
    h.a = mix64(h.a ^ v);
    h.b = mix64(h.b + v * 0xff51afd7ed558ccdull + 0x2545f4914f6cdd1dull);
  }
};

uint64_t operand_value(const Operand& o, const std::vector<uint64_t>& regs,
                       uint64_t mask) {
  return o.is_reg ? regs[o.value] : (o.value & mask);
}

uint64_t eval_value(const Instruction& ins, const std::vector<uint64_t>& regs,
                    unsigned w, uint64_t mask) {
  uint64_t a = ins.srcs.empty() ? 0 : operand_value(ins.srcs[0], regs, mask);
  uint64_t b =
      ins.srcs.size() < 2 ? 0 : operand_value(ins.srcs[1], regs, mask);
  switch (ins.opcode) {
    case Opcode::Li: return a;
    case Opcode::Mv: return a;
    case Opcode::And: return a & b;
    case Opcode::Or: return a | b;
    case Opcode::Xor: return a ^ b;
    case Opcode::Add: return (a + b) & mask;
    case Opcode::Sub: return (a - b) & mask;
    case Opcode::Shl: return b >= w ? 0 : (a << b) & mask;
    case Opcode::Shr: return b >= w ? 0 : a >> b;
    case Opcode::Seqz: return a == 0 ? 1 : 0;
    case Opcode::Snez: return a != 0 ? 1 : 0;
    case Opcode::Slt: return a < b ? 1 : 0;  // unsigned
    default: assert(false && "not a value opcode"); return 0;
  }
}

bool eval_branch(const Instruction& ins, const std::vector<uint64_t>& regs,
                 uint64_t mask) {
  uint64_t a = operand_value(ins.srcs[0], regs, mask);
  uint64_t b = operand_value(ins.srcs[1], regs, mask);
  switch (ins.opcode) {
    case Opcode::Beq: return a == b;
    case Opcode::Bne: return a != b;
    case Opcode::Blt: return a < b;   // unsigned
    case Opcode::Bge: return a >= b;  // unsigned
    default: assert(false && "not a branch opcode"); return false;
  }
}

}  // namespace

bool trace_equal(const Trace& a, const Trace& b) {
  return a.status == b.status && a.ret_value == b.ret_value &&
         a.events == b.events;
}

Hash128 hash_full(const Trace& t) {
  Hasher h;
  for (const TraceEvent& e : t.events) {
    h.feed(static_cast<uint64_t>(e.point));
    if (e.write) {
      h.feed(0x11 + e.write->first);
      h.feed(e.write->second);
    }
    if (e.branch_taken) h.feed(*e.branch_taken ? 0x33 : 0x22);
  }
  h.feed(t.status == TermStatus::Returned ? 0x51 : 0x42);
  h.feed(t.ret_value);
  return h.h;
}

Hash128 hash_observable(const Trace& t) {
  Hasher h;
  for (const TraceEvent& e : t.events) {
    h.feed(static_cast<uint64_t>(e.point));
    if (e.branch_taken) h.feed(*e.branch_taken ? 0x33 : 0x22);
  }
  h.feed(t.status == TermStatus::Returned ? 0x51 : 0x42);
  h.feed(t.ret_value);
  return h.h;
}

std::vector<uint64_t> initial_regs(
    const Function& fn,
    const std::vector<std::pair<unsigned, uint64_t>>& inputs) {
  std::vector<uint64_t> regs(fn.nregs, 0);
  for (auto [r, v] : inputs) {
    assert(r < fn.nregs);
    regs[r] = v & fn.value_mask();
  }
  return regs;
}

Trace execute(const CFG& cfg, std::vector<uint64_t> regs,
              const std::vector<FaultSpec>& flips, long cycle_limit) {
  const Function& fn = *cfg.fn;
  const unsigned w = fn.width;
  const uint64_t mask = fn.value_mask();
  assert(regs.size() == fn.nregs);

  std::unordered_map<std::string, int> label_first;
  for (size_t b = 0; b < fn.blocks.size(); ++b)
    label_first[fn.blocks[b].label] =
        cfg.block_first[static_cast<int>(b)];

  std::vector<FaultSpec> pending = flips;
  std::stable_sort(pending.begin(), pending.end(),
                   [](const FaultSpec& x, const FaultSpec& y) {
                     return x.cycle < y.cycle;
                   });
  size_t next_flip = 0;

  Trace t;
  int p = 0;
  for (long cycle = 0; cycle < cycle_limit; ++cycle) {
    while (next_flip < pending.size() &&
           pending[next_flip].cycle == cycle) {
      const FaultSpec& f = pending[next_flip++];
      assert(f.reg < fn.nregs && f.bit < w);
      regs[f.reg] ^= 1ull << f.bit;
    }
    const Instruction& ins = cfg.instr(p);
    TraceEvent ev{cycle, p, std::nullopt, std::nullopt};
    if (ins.opcode == Opcode::Ret) {
      t.events.push_back(ev);
      t.status = TermStatus::Returned;
      t.ret_value = operand_value(ins.srcs[0], regs, mask);
      return t;
    }
    if (ins.opcode == Opcode::Jmp) {
      p = label_first.at(*ins.target);
    } else if (is_cond_branch(ins.opcode)) {
      bool taken = eval_branch(ins, regs, mask);
      ev.branch_taken = taken;
      p = taken ? label_first.at(*ins.target) : p + 1;
    } else {
      uint64_t val = eval_value(ins, regs, w, mask);
      regs[*ins.dst] = val;
      ev.write = {*ins.dst, val};
      p = p + 1;
    }
    t.events.push_back(ev);
  }
  t.status = TermStatus::CycleLimit;
  return t;
}

std::vector<DynamicFaultSite> inject_on_read_space(const CFG& cfg,
                                                   const AccessSets& acc,
                                                   const Trace& golden) {
  const unsigned w = cfg.fn->width;
  std::vector<DynamicFaultSite> space;
  for (const TraceEvent& e : golden.events) {
    uint64_t reads = acc.read[e.point];
    for (unsigned v = 0; reads >> v; ++v) {
      if (!(reads >> v & 1)) continue;
      for (unsigned i = 0; i < w; ++i)
        space.push_back({e.cycle, v, i, e.point});
    }
  }
  return space;
}

WindowMap build_windows(const CFG& cfg, const AccessSets& acc,
                        const Trace& golden) {
  const unsigned m = cfg.fn->nregs;
  WindowMap wm;
  std::vector<int> cur(m);
  for (unsigned v = 0; v < m; ++v) {
    cur[v] = static_cast<int>(wm.windows.size());
    wm.windows.push_back({v, -1, -1, -1, -1, false});
  }
  for (const TraceEvent& e : golden.events) {
    uint64_t accessed = acc.accessed(e.point);
    for (unsigned v = 0; accessed >> v; ++v) {
      if (!(accessed >> v & 1)) continue;
      bool is_read = acc.read[e.point] >> v & 1;
      DynWindow& old = wm.windows[cur[v]];
      old.close_cycle = e.cycle;
      old.close_point = e.point;
      old.close_is_read = is_read;
      if (is_read) wm.closed_by_read[{e.cycle, v}] = cur[v];
      cur[v] = static_cast<int>(wm.windows.size());
      wm.windows.push_back({v, e.cycle, e.point, -1, -1, false});
      wm.opened_at[{e.cycle, v}] = cur[v];
    }
  }
  return wm;
}

DynRelation build_dynamic_relation(const CFG& cfg, const AccessSets& acc,
                                   const Trace& golden,
                                   const CoalesceResult& co) {
  const unsigned w = cfg.fn->width;
  DynRelation rel;
  rel.windows = build_windows(cfg, acc, golden);
  rel.width = w;

  const int nwin = static_cast<int>(rel.windows.windows.size());
  rel.uf = EquivRelation(1 + nwin * static_cast<int>(w));
  rel.relocated_node.assign(rel.uf.size(), false);
  rel.anchor_site.resize(nwin);

  // Anchor each window at the static site of its opening access.
  std::map<std::pair<int, unsigned>, std::vector<int>> by_anchor;
  for (int k = 0; k < nwin; ++k) {
    const DynWindow& win = rel.windows.windows[k];
    rel.anchor_site[k] = co.table.id_of(win.open_point, win.reg, 0);
    if (rel.anchor_site[k] >= 0)
      by_anchor[{win.open_point, win.reg}].push_back(k);
  }

  // Statically masked anchors: every instance is masked.
  for (int k = 0; k < nwin; ++k) {
    if (rel.anchor_site[k] < 0) continue;
    const DynWindow& win = rel.windows.windows[k];
    for (unsigned i = 0; i < w; ++i) {
      int sid = co.table.id_of(win.open_point, win.reg, i);
      if (co.rel.same(kMaskedElem, sid)) rel.uf.merge(0, rel.node(k, i));
    }
  }

  for (const MergeFact& f : co.facts) {
    const SiteTable::Site& sa = co.table.sites[f.a];
    auto it = by_anchor.find({sa.point, sa.reg});
    if (it == by_anchor.end()) continue;
    if (f.kind == MergeFact::Kind::PortPair) {
      const SiteTable::Site& sb = co.table.sites[f.b];
      for (int k : it->second)
        rel.uf.merge(rel.node(k, sa.bit), rel.node(k, sb.bit));
    } else {
      // Relocation across one def-use step: an instance anchored at the
      // source site maps to the destination window opened by the use.
      const SiteTable::Site& sb = co.table.sites[f.b];
      for (int k : it->second) {
        const DynWindow& win = rel.windows.windows[k];
        if (!win.close_is_read || win.close_point != f.use_point) continue;
        int k2 = rel.windows.opened_at.at({win.close_cycle, sb.reg});
        int na = rel.node(k, sa.bit), nb = rel.node(k2, sb.bit);
        rel.uf.merge(na, nb);
        rel.relocated_node[na] = rel.relocated_node[nb] = true;
      }
    }
  }
  rel.relocated_root.assign(rel.uf.size(), false);
  for (int n = 0; n < rel.uf.size(); ++n)
    if (rel.relocated_node[n]) rel.relocated_root[rel.uf.find(n)] = true;
  return rel;
}

Campaign run_campaign(const CFG& cfg, const std::vector<uint64_t>& regs0,
                      const std::vector<DynamicFaultSite>& plan,
                      const CampaignOptions& opt) {
  constexpr long kGoldenCap = 1'000'000;
  Campaign c;
  long golden_limit = opt.cycle_limit > 0 ? opt.cycle_limit : kGoldenCap;
  c.golden = execute(cfg, regs0, {}, golden_limit);
  c.golden.golden = true;
  long limit =
      opt.cycle_limit > 0 ? opt.cycle_limit : default_cycle_limit(c.golden);

  c.results.resize(plan.size());
  auto worker = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      const DynamicFaultSite& s = plan[i];
      Trace t = execute(cfg, regs0, {{s.cycle, s.reg, s.bit}}, limit);
      c.results[i] = {s, -1, trace_equal(t, c.golden), hash_observable(t),
                      hash_full(t)};
    }
  };
  size_t jobs = std::clamp<size_t>(opt.jobs, 1, std::max<size_t>(plan.size(), 1));
  if (jobs <= 1) {
    worker(0, plan.size());
  } else {
    std::vector<std::thread> pool;
    size_t chunk = (plan.size() + jobs - 1) / jobs;
    for (size_t j = 0; j < jobs; ++j) {
      size_t lo = j * chunk, hi = std::min(plan.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (std::thread& th : pool) th.join();
  }

  // Class ids are assigned sequentially in plan order, so they do not depend
  // on the number of worker threads. The golden behavior is always class 0.
  std::map<Hash128, int> class_of;
  class_of[hash_observable(c.golden)] = 0;
  int next = 1;
  std::set<int> used;
  std::set<Hash128> fulls;
  for (RunRecord& r : c.results) {
    auto [it, fresh] = class_of.try_emplace(r.observable, next);
    if (fresh) ++next;
    r.class_id = it->second;
    used.insert(r.class_id);
    fulls.insert(r.full);
  }
  c.classes = static_cast<int>(used.size());
  c.distinct_traces = static_cast<long>(fulls.size());
  return c;
}

ValidationReport validate_equivalence(const DynRelation& rel,
                                      const Campaign& campaign) {
  ValidationReport rep;
  rep.sites = static_cast<long>(campaign.results.size());
  std::map<int, long> by_dyn, by_cls;
  std::map<std::pair<int, int>, long> by_both;
  for (const RunRecord& r : campaign.results) {
    int d = rel.uf.find(rel.node_of_site(r.site));
    ++by_dyn[d];
    ++by_cls[r.class_id];
    ++by_both[{d, r.class_id}];
    if (d == 0) {
      ++rep.masked_sites;
      if (r.class_id != 0) ++rep.masked_mismatches;
    }
  }
  auto c2 = [](long n) { return n * (n - 1) / 2; };
  long same_dyn = 0, same_cls = 0, same_both = 0;
  for (auto& [k, n] : by_dyn) same_dyn += c2(n);
  for (auto& [k, n] : by_cls) same_cls += c2(n);
  for (auto& [k, n] : by_both) same_both += c2(n);
  rep.pairs_sound_precise = same_both;
  rep.pairs_unsound = same_dyn - same_both;
  rep.pairs_sound_imprecise = same_cls - same_both;
  rep.pairs_distinct = c2(rep.sites) - same_dyn - same_cls + same_both;
  rep.ok = rep.pairs_unsound == 0 && rep.masked_mismatches == 0;
  return rep;
}

}  // namespace bitrel
