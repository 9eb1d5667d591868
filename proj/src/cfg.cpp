// SPDX-License-Identifier: Apache-2.0
#include "cfg.hpp"

#include <algorithm>
#include <map>
#include <queue>

namespace bitrel {

CFG build_cfg(const Function& fn) {
  CFG cfg;
  cfg.fn = &fn;
  std::map<std::string, int> label_block;
  for (size_t b = 0; b < fn.blocks.size(); ++b) {
    cfg.block_first.push_back(cfg.num_points());
    label_block[fn.blocks[b].label] = static_cast<int>(b);
    for (const Instruction& ins : fn.blocks[b].instrs) {
      cfg.points.push_back(&ins);
      cfg.block_of.push_back(static_cast<int>(b));
    }
  }
  int n = cfg.num_points();
  cfg.succ.resize(n);
  cfg.pred.resize(n);
  for (int p = 0; p < n; ++p) {
    const Instruction& ins = cfg.instr(p);
    bool last_in_block =
        p + 1 == n || cfg.block_of[p + 1] != cfg.block_of[p];
    if (!last_in_block) {
      cfg.succ[p].push_back(p + 1);
      continue;
    }
    if (ins.target)
      cfg.succ[p].push_back(cfg.block_first[label_block.at(*ins.target)]);
    // Fallthrough: conditional branches and blocks without a terminator.
    if (!is_terminator(ins.opcode) || is_cond_branch(ins.opcode))
      cfg.succ[p].push_back(p + 1);
  }
  for (int p = 0; p < n; ++p)
    for (int s : cfg.succ[p]) cfg.pred[s].push_back(p);

  // Reverse post-order by iterative DFS from the entry point.
  std::vector<int> post;
  std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
  std::vector<std::pair<int, size_t>> stack = {{0, 0}};
  state[0] = 1;
  while (!stack.empty()) {
    auto& [p, next] = stack.back();
    if (next < cfg.succ[p].size()) {
      int s = cfg.succ[p][next++];
      if (state[s] == 0) {
        state[s] = 1;
        stack.push_back({s, 0});
      }
    } else {
      post.push_back(p);
      state[p] = 2;
      stack.pop_back();
    }
  }
  cfg.rpo.assign(post.rbegin(), post.rend());
  return cfg;
}

AccessSets compute_access_sets(const CFG& cfg) {
  int n = cfg.num_points();
  AccessSets acc;
  acc.read.assign(n, 0);
  acc.write.assign(n, 0);
  for (int p = 0; p < n; ++p) {
    const Instruction& ins = cfg.instr(p);
    for (const Operand& o : ins.srcs)
      if (o.is_reg) acc.read[p] |= uint64_t{1} << o.value;
    if (ins.dst) acc.write[p] |= uint64_t{1} << *ins.dst;
  }
  // Backward liveness to a (decreasing) fixed point.
  acc.live_in.assign(n, 0);
  acc.live_out.assign(n, 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int p = n - 1; p >= 0; --p) {
      uint64_t out = 0;
      for (int s : cfg.succ[p]) out |= acc.live_in[s];
      uint64_t in = acc.read[p] | (out & ~acc.write[p]);
      if (out != acc.live_out[p] || in != acc.live_in[p]) {
        acc.live_out[p] = out;
        acc.live_in[p] = in;
        changed = true;
      }
    }
  }
  acc.kill.assign(n, 0);
  for (int p = 0; p < n; ++p)
    acc.kill[p] = acc.accessed(p) & ~acc.live_out[p];
  return acc;
}

namespace {

// Reads of v reachable from `starts` before any redefinition of v. A point
// that both reads and writes v counts as a use, then stops the walk.
std::vector<int> uses_from(const CFG& cfg, const AccessSets& acc, unsigned v,
                           const std::vector<int>& starts) {
  uint64_t bit = uint64_t{1} << v;
  std::vector<int> uses;
  std::vector<bool> seen(cfg.num_points(), false);
  std::queue<int> work;
  for (int s : starts)
    if (!seen[s]) {
      seen[s] = true;
      work.push(s);
    }
  while (!work.empty()) {
    int q = work.front();
    work.pop();
    if (acc.read[q] & bit) uses.push_back(q);
    if (acc.write[q] & bit) continue;
    for (int s : cfg.succ[q])
      if (!seen[s]) {
        seen[s] = true;
        work.push(s);
      }
  }
  std::sort(uses.begin(), uses.end());
  return uses;
}

}  // namespace

DefUseIndex compute_def_use(const CFG& cfg, const AccessSets& acc) {
  int n = cfg.num_points();
  unsigned m = cfg.fn->nregs;
  DefUseIndex du;

  // Forward reaching definitions; sets are small and kept sorted.
  using RegDefs = std::vector<std::vector<int>>;  // per register
  std::vector<RegDefs> in(n, RegDefs(m)), out(n, RegDefs(m));
  RegDefs entry(m);
  for (unsigned v = 0; v < m; ++v) entry[v] = {-1};
  auto merge_into = [](std::vector<int>& dst, const std::vector<int>& src) {
    std::vector<int> u;
    std::set_union(dst.begin(), dst.end(), src.begin(), src.end(),
                   std::back_inserter(u));
    bool grew = u.size() != dst.size();
    dst = std::move(u);
    return grew;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int p : cfg.rpo) {
      RegDefs next_in(m);
      if (p == 0) next_in = entry;
      for (int q : cfg.pred[p])
        for (unsigned v = 0; v < m; ++v) merge_into(next_in[v], out[q][v]);
      for (unsigned v = 0; v < m; ++v)
        if (next_in[v] != in[p][v]) {
          in[p][v] = next_in[v];
          changed = true;
        }
      RegDefs next_out = in[p];
      if (cfg.instr(p).dst) next_out[*cfg.instr(p).dst] = {p};
      for (unsigned v = 0; v < m; ++v)
        if (next_out[v] != out[p][v]) {
          out[p][v] = std::move(next_out[v]);
          changed = true;
        }
    }
  }

  du.flowdef.assign(n, std::vector<std::vector<int>>(m));
  du.flowuse.assign(n, std::vector<std::vector<int>>(m));
  uint64_t arg_mask = 0;
  for (unsigned a : cfg.fn->args) arg_mask |= uint64_t{1} << a;
  for (int p = 0; p < n; ++p)
    for (unsigned v = 0; v < m; ++v) {
      uint64_t bit = uint64_t{1} << v;
      if (acc.read[p] & bit) {
        du.flowdef[p][v] = in[p][v];
        bool maybe_undef =
            std::find(in[p][v].begin(), in[p][v].end(), -1) != in[p][v].end();
        if (maybe_undef && !(arg_mask & bit))
          du.undefined_reads.push_back({p, v});
      }
      if (acc.accessed(p) & bit)
        du.flowuse[p][v] = uses_from(cfg, acc, v, cfg.succ[p]);
    }
  du.entry_use.resize(m);
  for (unsigned v = 0; v < m; ++v)
    du.entry_use[v] = uses_from(cfg, acc, v, {0});
  return du;
}

}  // namespace bitrel
