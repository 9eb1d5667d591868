// SPDX-License-Identifier: Apache-2.0
// Fault-index coalescing: equivalence classes over static fault sites.
//
// A site (p, v, i) denotes a single-bit fault in register v, bit i, present
// from just after p's access of v until v's next access. Declared-argument
// sites (point -1) cover the span from function entry to the first access.
// Class 0 is the distinguished masked element: faults with no effect on the
// observable execution.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "bitvalue.hpp"
#include "cfg.hpp"

namespace bitrel {

constexpr int kMaskedElem = 0;

struct SiteTable {
  struct Site {
    int point;  // -1 for the entry value of a declared argument
    unsigned reg;
    unsigned bit;
  };
  // sites[0] is the masked sentinel; real sites start at id 1, ordered by
  // (point, reg, bit) with argument sites first.
  std::vector<Site> sites;
  std::map<std::tuple<int, unsigned, unsigned>, int> ids;

  int count() const { return static_cast<int>(sites.size()); }
  int id_of(int point, unsigned reg, unsigned bit) const {
    auto it = ids.find({point, reg, bit});
    return it == ids.end() ? -1 : it->second;
  }
  std::string name(int id) const;
};

SiteTable enumerate_sites(const CFG& cfg, const AccessSets& acc);

// Union-find whose class representative is always the lowest member id, so
// the masked class is always represented by id 0.
class EquivRelation {
 public:
  explicit EquivRelation(int n) : parent_(n) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }
  int size() const { return static_cast<int>(parent_.size()); }
  int find(int x) const;
  bool merge(int a, int b);  // true iff two classes were joined
  bool same(int a, int b) const { return find(a) == find(b); }
  int class_count() const;
  // Classes sorted by representative; members sorted ascending.
  std::vector<std::vector<int>> classes() const;
  friend bool operator==(const EquivRelation& a, const EquivRelation& b);

 private:
  mutable std::vector<int> parent_;
};

// Sites of killed registers start in the masked class, everything else is a
// fresh singleton.
EquivRelation init_fault_indices(const SiteTable& table, const CFG& cfg,
                                 const AccessSets& acc);

// Effect of a branch/comparator under a forced single-bit flip.
struct Outcome {
  enum class Kind : uint8_t { Unknown, Taken, NotTaken, Value } kind =
      Kind::Unknown;
  uint64_t value = 0;

  bool known() const { return kind != Kind::Unknown; }
  friend bool operator==(const Outcome& a, const Outcome& b) {
    return a.kind == b.kind && (a.kind != Kind::Value || a.value == b.value);
  }
};

// Per-(read point, register, bit) effect summary of a flip arriving at that
// read: provably absorbed (Masked), relocated into one bit of the written
// destination (DstBit), or neither.
struct Port {
  enum class Ground : uint8_t { None, Masked, DstBit } ground = Ground::None;
  unsigned dst_bit = 0;
  Outcome outcome;  // floweval result; meaningful for comparators/branches
};

struct PortMap {
  std::map<std::pair<int, unsigned>, std::vector<Port>> at;
  const Port& get(int q, unsigned v, unsigned i) const {
    return at.at({q, v})[i];
  }
};

PortMap compute_ports(const CFG& cfg, const AccessSets& acc,
                      const BitValueMap& bv);

// Merge provenance needed to mirror the static relation onto dynamic
// execution instances (see faultsim).
struct MergeFact {
  enum class Kind : uint8_t { UseGroundSite, PortPair } kind;
  int a, b;            // site ids; for UseGroundSite b is the dst-bit site
  int use_point = -1;  // the read point justifying a UseGroundSite fact
};

struct CoalesceResult {
  SiteTable table;
  EquivRelation rel{1};
  std::vector<MergeFact> facts;
  int sweeps = 0;  // inter-phase sweeps until the relation stops changing
};

// One inter-phase sweep: applies every rule-derived merge to `rel`; returns
// true if any class changed. Facts are appended only when `record` is set.
bool inter_merge_sweep(const SiteTable& table, const CFG& cfg,
                       const AccessSets& acc, const DefUseIndex& du,
                       const PortMap& ports, EquivRelation& rel,
                       std::vector<MergeFact>* record);

CoalesceResult coalesce(const CFG& cfg, const AccessSets& acc,
                        const DefUseIndex& du, const BitValueMap& bv);

}  // namespace bitrel
