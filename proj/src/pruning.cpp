// SPDX-License-Identifier: Apache-2.0
#include "pruning.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace bitrel {

StaticSiteStats static_site_stats(const CoalesceResult& co) {
  StaticSiteStats s;
  s.sites = co.table.count() - 1;  // id 0 is the sentinel masked element
  for (int id = 1; id < co.table.count(); ++id)
    if (co.rel.same(kMaskedElem, id)) ++s.masked;
  s.live = s.sites - s.masked;
  s.live_classes = co.rel.class_count() - 1;
  return s;
}

CampaignPlan inject_on_read_plan(const CFG& cfg, const AccessSets& acc,
                                 const Trace& golden) {
  CampaignPlan plan;
  plan.full_space = inject_on_read_space(cfg, acc, golden);
  plan.injections = plan.full_space;
  plan.rep_index.resize(plan.full_space.size());
  for (size_t i = 0; i < plan.rep_index.size(); ++i)
    plan.rep_index[i] = static_cast<int>(i);
  return plan;
}

std::pair<CampaignPlan, PruneStats> bec_prune_plan(const CFG& cfg,
                                                   const AccessSets& acc,
                                                   const Trace& golden,
                                                   const DynRelation& rel,
                                                   const CoalesceResult& co) {
  CampaignPlan plan;
  PruneStats stats;
  plan.full_space = inject_on_read_space(cfg, acc, golden);
  plan.rep_index.assign(plan.full_space.size(), -1);

  std::map<int, int> rep_of_class;  // dynamic class root -> injection index
  for (size_t i = 0; i < plan.full_space.size(); ++i) {
    const DynamicFaultSite& s = plan.full_space[i];
    int root = rel.uf.find(rel.node_of_site(s));
    if (root == 0) {
      ++stats.masked_bits;
      continue;
    }
    auto [it, fresh] =
        rep_of_class.try_emplace(root, static_cast<int>(plan.injections.size()));
    if (fresh)
      plan.injections.push_back(s);
    else
      ++stats.inferrable_bits;
    plan.rep_index[i] = it->second;
  }
  stats.live_in_values = static_cast<long>(plan.full_space.size());
  stats.live_in_bits = static_cast<long>(plan.injections.size());
  stats.pruned_fraction =
      stats.live_in_values == 0
          ? 0.0
          : 1.0 - static_cast<double>(stats.live_in_bits) /
                      static_cast<double>(stats.live_in_values);
  stats.static_sites = static_site_stats(co);
  return {std::move(plan), stats};
}

Campaign expand_results(const Campaign& pruned, const CampaignPlan& plan) {
  if (pruned.results.size() != plan.injections.size())
    throw std::invalid_argument("campaign does not cover the plan");
  for (size_t i = 0; i < plan.injections.size(); ++i)
    if (!(pruned.results[i].site == plan.injections[i]))
      throw std::invalid_argument("campaign sites do not match the plan");

  Campaign full;
  full.golden = pruned.golden;
  Hash128 gobs = hash_observable(pruned.golden);
  Hash128 gfull = hash_full(pruned.golden);
  full.results.resize(plan.full_space.size());
  for (size_t i = 0; i < plan.full_space.size(); ++i) {
    int r = plan.rep_index[i];
    if (r < 0)
      full.results[i] = {plan.full_space[i], 0, true, gobs, gfull};
    else
      full.results[i] = {plan.full_space[i], pruned.results[r].class_id,
                         pruned.results[r].equals_golden,
                         pruned.results[r].observable, pruned.results[r].full};
  }
  std::set<int> used;
  std::set<Hash128> fulls;
  for (const RunRecord& r : full.results) {
    used.insert(r.class_id);
    fulls.insert(r.full);
  }
  full.classes = static_cast<int>(used.size());
  full.distinct_traces = static_cast<long>(fulls.size());
  return full;
}

}  // namespace bitrel
