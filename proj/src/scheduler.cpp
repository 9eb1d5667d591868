// SPDX-License-Identifier: Apache-2.0
#include "scheduler.hpp"

#include <algorithm>
#include <cassert>

namespace bitrel {

namespace {

int block_size(const CFG& cfg, int block) {
  int first = cfg.block_first[block];
  int end = block + 1 < static_cast<int>(cfg.block_first.size())
                ? cfg.block_first[block + 1]
                : cfg.num_points();
  return end - first;
}

// Bits of the value covered by static site (point, v, *) that are not in
// the masked class. Sites absent from the table count as live.
long unmasked_bits(const CoalesceResult& co, int point, unsigned v,
                   unsigned w) {
  long live = 0;
  for (unsigned i = 0; i < w; ++i) {
    int id = co.table.id_of(point, v, i);
    if (id < 0 || !co.rel.same(kMaskedElem, id)) ++live;
  }
  return live;
}

// Scores for every instruction of the block, on the original order.
std::vector<long> block_scores(const CFG& cfg, const AccessSets& acc,
                               const CoalesceResult& co, int block) {
  const int first = cfg.block_first[block];
  const int n = block_size(cfg, block);
  const int last_p = first + n - 1;
  const unsigned w = cfg.fn->width;
  std::vector<long> scores(n, 0);

  // Kill credit: one block-local value epoch of v runs from its definition
  // (or block entry) to its last read; if the epoch ends inside the block
  // (rewritten) or its value is dead at block exit, the last reader retires
  // w fault-site bits. A read and write at the same instruction read the
  // old epoch first.
  for (unsigned v = 0; v < cfg.fn->nregs; ++v) {
    int last_reader = -1;
    for (int j = 0; j < n; ++j) {
      int p = first + j;
      if (acc.read[p] >> v & 1) last_reader = j;
      if (acc.write[p] >> v & 1) {
        if (last_reader >= 0) scores[last_reader] += w;
        last_reader = -1;
      }
    }
    if (last_reader >= 0 && !(acc.live_out[last_p] >> v & 1))
      scores[last_reader] += w;
  }
  // Definition cost: statically unmasked bits of the written value. Dead
  // definitions start in the masked class and cost nothing.
  for (int j = 0; j < n; ++j) {
    const Instruction& ins = cfg.instr(first + j);
    if (ins.dst) scores[j] -= unmasked_bits(co, first + j, *ins.dst, w);
  }
  return scores;
}

}  // namespace

DependencyDAG build_block_dag(const CFG& cfg, const AccessSets& acc,
                              int block) {
  const int first = cfg.block_first[block];
  const int n = block_size(cfg, block);
  DependencyDAG dag;
  dag.block = block;
  dag.preds.resize(n);
  dag.succs.resize(n);
  auto add_edge = [&](int i, int j) {
    if (std::find(dag.succs[i].begin(), dag.succs[i].end(), j) ==
        dag.succs[i].end()) {
      dag.succs[i].push_back(j);
      dag.preds[j].push_back(i);
    }
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) {
      uint64_t raw = acc.read[first + j] & acc.write[first + i];
      uint64_t war = acc.write[first + j] & acc.read[first + i];
      uint64_t waw = acc.write[first + j] & acc.write[first + i];
      if (raw | war | waw) add_edge(i, j);
    }
  dag.pinned_terminator = is_terminator(cfg.instr(first + n - 1).opcode);
  if (dag.pinned_terminator)
    for (int i = 0; i < n - 1; ++i) add_edge(i, n - 1);
  return dag;
}

long retirement_score(const CFG& cfg, const AccessSets& acc,
                      const CoalesceResult& co, int block, int local) {
  return block_scores(cfg, acc, co, block)[local];
}

std::vector<int> schedule_block(const CFG& cfg, const AccessSets& acc,
                                const CoalesceResult& co, int block,
                                SchedPolicy policy) {
  DependencyDAG dag = build_block_dag(cfg, acc, block);
  std::vector<long> scores = block_scores(cfg, acc, co, block);
  const int n = dag.size();
  std::vector<int> indeg(n);
  for (int j = 0; j < n; ++j) indeg[j] = static_cast<int>(dag.preds[j].size());

  std::vector<int> ready, order;
  for (int j = 0; j < n; ++j)
    if (indeg[j] == 0) ready.push_back(j);
  while (!ready.empty()) {
    int pick = ready[0];
    for (int cand : ready) {
      bool better = policy == SchedPolicy::Best ? scores[cand] > scores[pick]
                                                : scores[cand] < scores[pick];
      if (better || (scores[cand] == scores[pick] && cand < pick))
        pick = cand;
    }
    ready.erase(std::find(ready.begin(), ready.end(), pick));
    order.push_back(pick);
    for (int s : dag.succs[pick])
      if (--indeg[s] == 0) ready.push_back(s);
  }
  assert(static_cast<int>(order.size()) == n && "hazard DAG must be acyclic");
  return order;
}

Function reschedule_function(const CFG& cfg, const AccessSets& acc,
                             const CoalesceResult& co, SchedPolicy policy) {
  Function out = *cfg.fn;
  for (int b = 0; b < static_cast<int>(out.blocks.size()); ++b) {
    std::vector<int> order = schedule_block(cfg, acc, co, b, policy);
    const std::vector<Instruction>& orig = cfg.fn->blocks[b].instrs;
    std::vector<Instruction> next;
    next.reserve(orig.size());
    for (int j : order) next.push_back(orig[j]);
    out.blocks[b].instrs = std::move(next);
  }
  int point = 0;
  for (Block& blk : out.blocks)
    for (Instruction& ins : blk.instrs) ins.point = point++;
  return out;
}

VulnerabilityReport vulnerability(const CFG& cfg, const AccessSets& acc,
                                  const CoalesceResult& co,
                                  const Trace& golden) {
  const unsigned w = cfg.fn->width;
  const unsigned m = cfg.fn->nregs;
  std::vector<int> last_access(m, -1);
  VulnerabilityReport rep;
  for (const TraceEvent& e : golden.events) {
    const Instruction& ins = cfg.instr(e.point);
    if (ins.opcode == Opcode::Ret && ins.srcs[0].is_reg) {
      unsigned v = static_cast<unsigned>(ins.srcs[0].value);
      rep.live_fault_sites += unmasked_bits(co, last_access[v], v, w);
    }
    uint64_t accessed = acc.accessed(e.point);
    for (unsigned v = 0; accessed >> v; ++v)
      if (accessed >> v & 1) last_access[v] = e.point;
    uint64_t live = acc.live_out[e.point];
    for (unsigned v = 0; live >> v; ++v)
      if (live >> v & 1)
        rep.live_fault_sites += unmasked_bits(co, last_access[v], v, w);
  }
  rep.total_fault_space = golden.cycles() * m * w;
  return rep;
}

}  // namespace bitrel
