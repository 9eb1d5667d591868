// SPDX-License-Identifier: Apache-2.0
// JSON emitters and parsers for every CLI artifact. All emitters use
// ordered_json so key order (and therefore output bytes) is stable.
#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "bitvalue.hpp"
#include "cfg.hpp"
#include "coalesce.hpp"
#include "faultsim.hpp"
#include "pruning.hpp"
#include "scheduler.hpp"

namespace bitrel {

using ojson = nlohmann::ordered_json;

ojson analyze_json(const CFG& cfg, const BitValueMap& bv);
ojson coalesce_json(const CFG& cfg, const CoalesceResult& co);
ojson campaign_json(const Campaign& c);
ojson plan_json(const CampaignPlan& plan);
ojson stats_json(const PruneStats& s);
ojson validation_json(const ValidationReport& r);
ojson vulnerability_json(const VulnerabilityReport& r);

// One event per line, then a terminal status line.
std::string trace_json_lines(const Trace& t);

// Inverse of plan_json / campaign_json (class map only). Throw
// std::runtime_error on malformed input.
CampaignPlan plan_from_json(const ojson& j);
struct SiteClass {
  DynamicFaultSite site;
  int class_id = 0;
};
std::vector<SiteClass> campaign_sites_from_json(const ojson& j);

// File-level expansion used by the `expand` subcommand: masked sites get
// class 0, the rest inherit their representative's class id.
ojson expand_campaign_json(const ojson& plan, const ojson& campaign);

// Minimal JSON-Schema subset checker (type, properties, required, items,
// enum). Returns a description of the first mismatch, or nullopt if valid.
std::optional<std::string> schema_mismatch(const ojson& value,
                                           const ojson& schema);

}  // namespace bitrel
