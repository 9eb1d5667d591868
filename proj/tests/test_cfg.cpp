// SPDX-License-Identifier: Apache-2.0
// Point-level CFG, liveness, and def-use chains, cross-checked against an
// independent transitive-closure oracle on fixtures and generated programs.
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "cfg.hpp"
#include "corpus.hpp"

using namespace bitrel;

namespace {

Program load(const std::string& name) {
  std::ifstream in(std::string(BITREL_DATA_DIR) + "/" + name + ".bir");
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto r = parse_program(ss.str());
  REQUIRE(std::holds_alternative<Program>(r));
  return std::get<Program>(std::move(r));
}

// Boolean reachability closure over edges that do not pass through a write
// of v: reach[a][b] = some path a -> b whose interior points leave v alone.
// Entry/exit of the path handle reads and writes explicitly at the callers.
struct Closure {
  int n;
  std::vector<std::vector<bool>> step, reach;

  Closure(const CFG& cfg, const AccessSets& acc, unsigned v) : n(cfg.num_points()) {
    uint64_t bit = uint64_t{1} << v;
    step.assign(n, std::vector<bool>(n, false));
    for (int p = 0; p < n; ++p)
      for (int s : cfg.succ[p]) step[p][s] = true;
    // reach = step . (edges from non-writing points)*, Floyd-Warshall.
    reach = step;
    for (int k = 0; k < n; ++k) {
      if (acc.write[k] & bit) continue;  // cannot pass through a write
      for (int a = 0; a < n; ++a)
        if (reach[a][k])
          for (int b = 0; b < n; ++b)
            if (reach[k][b]) reach[a][b] = true;
    }
  }
};

void check_def_use_against_closure(const CFG& cfg, const AccessSets& acc,
                                   const DefUseIndex& du) {
  int n = cfg.num_points();
  for (unsigned v = 0; v < cfg.fn->nregs; ++v) {
    uint64_t bit = uint64_t{1} << v;
    Closure cl(cfg, acc, v);
    // flowuse[p][v]: reads of the value of v as of just after p; populated
    // only at points accessing v.
    for (int p = 0; p < n; ++p) {
      if (!(acc.accessed(p) & bit)) {
        CHECK(du.flowuse[p][v].empty());
        continue;
      }
      std::set<int> expect;
      for (int q = 0; q < n; ++q)
        if ((acc.read[q] & bit) && cl.reach[p][q]) expect.insert(q);
      std::set<int> got(du.flowuse[p][v].begin(), du.flowuse[p][v].end());
      CAPTURE(p);
      CAPTURE(v);
      CHECK(got == expect);
    }
    // entry_use[v]: reads of the entry value (point 0 counts if it reads).
    {
      std::set<int> expect;
      if (acc.read[0] & bit) expect.insert(0);
      for (int q = 0; q < n; ++q)
        if ((acc.read[q] & bit) && !(acc.write[0] & bit) && cl.reach[0][q])
          expect.insert(q);
      std::set<int> got(du.entry_use[v].begin(), du.entry_use[v].end());
      CAPTURE(v);
      CHECK(got == expect);
    }
    // flowdef[p][v]: writes of v that can reach the read at p, plus the
    // entry pseudo-def -1 when an initial value can reach it.
    for (int p = 0; p < n; ++p) {
      if (!(acc.read[p] & bit)) continue;
      std::set<int> expect;
      for (int d = 0; d < n; ++d)
        if ((acc.write[d] & bit) && cl.reach[d][p]) expect.insert(d);
      bool entry_reaches = (p == 0) || (!(acc.write[0] & bit) && cl.reach[0][p]);
      if (entry_reaches) expect.insert(-1);
      std::set<int> got(du.flowdef[p][v].begin(), du.flowdef[p][v].end());
      CAPTURE(p);
      CAPTURE(v);
      CHECK(got == expect);
    }
    // Liveness duality: v live-out at p iff some reachable read sees p's
    // value; live-in additionally counts p's own read.
    for (int p = 0; p < n; ++p) {
      bool out_expect = false;
      for (int q = 0; q < n; ++q)
        if ((acc.read[q] & bit) && cl.reach[p][q]) out_expect = true;
      CAPTURE(p);
      CAPTURE(v);
      CHECK(((acc.live_out[p] >> v) & 1) == static_cast<uint64_t>(out_expect));
      bool in_expect = (acc.read[p] & bit) != 0 ||
                       (out_expect && !(acc.write[p] & bit));
      CHECK(((acc.live_in[p] >> v) & 1) == static_cast<uint64_t>(in_expect));
    }
  }
}

}  // namespace

TEST_CASE("cfg edges and rpo of the bundled program") {
  Program p = load("count_years");
  CFG cfg = build_cfg(p.functions[0]);
  REQUIRE(cfg.num_points() == 11);
  // entry: p0 p1 fall into loop; loop: p2..p9 (bne -> loop | exit).
  CHECK(cfg.succ[0] == std::vector<int>{1});
  CHECK(cfg.succ[1] == std::vector<int>{2});
  CHECK(cfg.succ[9] == std::vector<int>{2, 10});
  CHECK(cfg.succ[10].empty());
  CHECK(cfg.pred[2] == std::vector<int>{1, 9});
  CHECK(cfg.block_of[1] == 0);
  CHECK(cfg.block_of[2] == 1);
  CHECK(cfg.block_of[10] == 2);
  CHECK(cfg.block_first == std::vector<int>{0, 2, 10});
  REQUIRE(cfg.rpo.size() == 11);
  CHECK(cfg.rpo.front() == 0);
  std::set<int> uniq(cfg.rpo.begin(), cfg.rpo.end());
  CHECK(uniq.size() == 11);
}

TEST_CASE("access sets of the bundled program") {
  Program p = load("count_years");
  CFG cfg = build_cfg(p.functions[0]);
  AccessSets acc = compute_access_sets(cfg);
  auto R = [](std::initializer_list<unsigned> regs) {
    uint64_t m = 0;
    for (unsigned r : regs) m |= uint64_t{1} << r;
    return m;
  };
  CHECK(acc.read[0] == 0);          // li
  CHECK(acc.write[0] == R({0}));
  CHECK(acc.read[2] == R({1}));     // and r1, 1
  CHECK(acc.write[2] == R({2}));
  CHECK(acc.read[7] == R({2, 3}));  // and r2, r3
  CHECK(acc.read[9] == R({1}));     // bne r1, 0
  CHECK(acc.write[9] == 0);
  CHECK(acc.read[10] == R({0}));    // ret r0
  // r0 and r1 are live around the loop; r2/r3 die inside the body.
  CHECK(acc.live_in[2] == R({0, 1}));
  CHECK(acc.live_out[9] == R({0, 1}));
  CHECK(acc.live_out[10] == 0);
  CHECK(acc.kill[10] == R({0}));
  CHECK(acc.kill[7] == R({3}));  // r3 dead after the join and
  CHECK(acc.kill[2] == 0);
}

TEST_CASE("def-use chains of the bundled program") {
  Program p = load("count_years");
  CFG cfg = build_cfg(p.functions[0]);
  AccessSets acc = compute_access_sets(cfg);
  DefUseIndex du = compute_def_use(cfg, acc);
  // The read of r1 at p2 sees the li at p1 or the sub at p4 (backedge).
  CHECK(du.flowdef[2][1] == std::vector<int>{1, 4});
  // The value of r2 after p2 is read at p5 only.
  CHECK(du.flowuse[2][2] == std::vector<int>{5});
  // The value of r0 after p8 is read at p8 (next iteration) and p10.
  CHECK(du.flowuse[8][0] == std::vector<int>{8, 10});
  CHECK(du.undefined_reads.empty());
  check_def_use_against_closure(cfg, acc, du);
}

TEST_CASE("def-use and liveness match the closure oracle on fixtures") {
  for (const char* name :
       {"fork_join_mask", "mv_chain", "loop_invariant_read", "double_use_xor",
        "branch_group", "nonconst_shift", "count_years_best"}) {
    CAPTURE(name);
    Program p = load(name);
    CFG cfg = build_cfg(p.functions[0]);
    AccessSets acc = compute_access_sets(cfg);
    DefUseIndex du = compute_def_use(cfg, acc);
    check_def_use_against_closure(cfg, acc, du);
  }
}

TEST_CASE("def-use and liveness match the closure oracle on generated programs") {
  for (int i = 0; i < 40; ++i) {
    GenProgram g = gen_corpus_program(911, i);
    CAPTURE(i);
    CFG cfg = build_cfg(g.program.functions[0]);
    AccessSets acc = compute_access_sets(cfg);
    DefUseIndex du = compute_def_use(cfg, acc);
    check_def_use_against_closure(cfg, acc, du);
  }
}

TEST_CASE("undefined reads are reported for non-argument registers") {
  auto r = parse_program(
      "func f width 4 regs 4 {\n"
      "bb entry:\n"
      "  r0 = add r1, r2\n"
      "  ret r0\n"
      "}\n");
  REQUIRE(std::holds_alternative<Program>(r));
  Program p = std::get<Program>(std::move(r));
  CFG cfg = build_cfg(p.functions[0]);
  AccessSets acc = compute_access_sets(cfg);
  DefUseIndex du = compute_def_use(cfg, acc);
  REQUIRE(du.undefined_reads.size() == 2);
  CHECK(du.undefined_reads[0] == std::pair<int, unsigned>{0, 1});
  CHECK(du.undefined_reads[1] == std::pair<int, unsigned>{0, 2});
  // Declared arguments are defined.
  auto r2 = parse_program(
      "func f args r1,r2 width 4 regs 4 {\n"
      "bb entry:\n"
      "  r0 = add r1, r2\n"
      "  ret r0\n"
      "}\n");
  Program p2 = std::get<Program>(std::move(r2));
  CFG cfg2 = build_cfg(p2.functions[0]);
  AccessSets acc2 = compute_access_sets(cfg2);
  CHECK(compute_def_use(cfg2, acc2).undefined_reads.empty());
}
