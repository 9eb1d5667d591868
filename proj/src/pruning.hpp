// SPDX-License-Identifier: Apache-2.0
// Campaign planning: the inject-on-read baseline and the equivalence-pruned
// plan, plus expansion of pruned results back over the full fault space.
#pragma once

#include <vector>

#include "faultsim.hpp"

namespace bitrel {

// Every full-space site maps to either "masked" (rep_index -1) or the index
// in `injections` of the representative whose result it inherits.
struct CampaignPlan {
  std::vector<DynamicFaultSite> injections;
  std::vector<DynamicFaultSite> full_space;  // (cycle, reg, bit) ascending
  std::vector<int> rep_index;                // parallel to full_space
};

struct StaticSiteStats {
  long sites = 0;         // static fault-index sites (sentinel excluded)
  long masked = 0;        // sites in the static masked class
  long live = 0;          // sites - masked
  long live_classes = 0;  // equivalence classes among live sites

  friend bool operator==(const StaticSiteStats&,
                         const StaticSiteStats&) = default;
};

StaticSiteStats static_site_stats(const CoalesceResult& co);

struct PruneStats {
  long live_in_values = 0;     // full inject-on-read space size
  long live_in_bits = 0;       // injections actually planned
  long masked_bits = 0;        // dropped: provably no effect
  long inferrable_bits = 0;    // dropped: inherit a representative's result
  double pruned_fraction = 0;  // 1 - live_in_bits / live_in_values
  StaticSiteStats static_sites;
};

// Baseline: probe every (read event, bit); representatives are identity.
CampaignPlan inject_on_read_plan(const CFG& cfg, const AccessSets& acc,
                                 const Trace& golden);

// Keep the lowest-(cycle, reg, bit) member of every non-masked dynamic
// class; drop the rest as masked or inferrable.
std::pair<CampaignPlan, PruneStats> bec_prune_plan(const CFG& cfg,
                                                   const AccessSets& acc,
                                                   const Trace& golden,
                                                   const DynRelation& rel,
                                                   const CoalesceResult& co);

// Reconstruct the full-space result from a campaign over plan.injections:
// masked sites get class 0, others inherit their representative's class id.
// Throws std::invalid_argument if the campaign does not cover the plan.
Campaign expand_results(const Campaign& pruned, const CampaignPlan& plan);

}  // namespace bitrel
