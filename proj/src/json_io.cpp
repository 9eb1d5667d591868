// SPDX-License-Identifier: Apache-2.0
#include "json_io.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace bitrel {

namespace {

ojson site_json(const DynamicFaultSite& s) {
  return {{"cycle", s.cycle}, {"reg", s.reg}, {"bit", s.bit}};
}

DynamicFaultSite site_from_json(const ojson& j) {
  DynamicFaultSite s;
  s.cycle = j.at("cycle").get<long>();
  s.reg = j.at("reg").get<unsigned>();
  s.bit = j.at("bit").get<unsigned>();
  return s;
}

std::string reg_key(unsigned v) { return "r" + std::to_string(v); }

ojson state_json(const std::vector<AbsWord>& state) {
  ojson out = ojson::object();
  for (unsigned v = 0; v < state.size(); ++v)
    out[reg_key(v)] = state[v].to_string();
  return out;
}

}  // namespace

ojson analyze_json(const CFG& cfg, const BitValueMap& bv) {
  ojson out;
  out["function"] = cfg.fn->name;
  out["width"] = cfg.fn->width;
  out["regs"] = cfg.fn->nregs;
  out["points"] = ojson::array();
  for (int p = 0; p < cfg.num_points(); ++p) {
    ojson pt;
    pt["point"] = p;
    pt["block"] = cfg.fn->blocks[cfg.block_of[p]].label;
    pt["instr"] = print_instruction(cfg.instr(p));
    pt["in"] = state_json(bv.in_state[p]);
    pt["out"] = state_json(bv.out_state[p]);
    out["points"].push_back(std::move(pt));
  }
  return out;
}

ojson coalesce_json(const CFG& cfg, const CoalesceResult& co) {
  ojson out;
  out["function"] = cfg.fn->name;
  out["sites"] = co.table.count() - 1;
  long masked = 0;
  for (int id = 1; id < co.table.count(); ++id)
    if (co.rel.same(kMaskedElem, id)) ++masked;
  out["masked"] = masked;
  out["live"] = co.table.count() - 1 - masked;
  out["live_classes"] = co.rel.class_count() - 1;
  out["classes"] = ojson::array();
  for (const std::vector<int>& cls : co.rel.classes()) {
    ojson names = ojson::array();
    for (int id : cls) names.push_back(co.table.name(id));
    out["classes"].push_back(std::move(names));
  }
  return out;
}

ojson campaign_json(const Campaign& c) {
  ojson out;
  out["runs"] = c.results.size();
  out["classes"] = c.classes;
  out["results"] = ojson::array();
  for (const RunRecord& r : c.results) {
    ojson rec = site_json(r.site);
    rec["class"] = r.class_id;
    out["results"].push_back(std::move(rec));
  }
  return out;
}

ojson plan_json(const CampaignPlan& plan) {
  ojson out;
  out["injections"] = ojson::array();
  for (const DynamicFaultSite& s : plan.injections)
    out["injections"].push_back(site_json(s));
  out["map"] = ojson::array();
  for (size_t i = 0; i < plan.full_space.size(); ++i) {
    ojson entry = site_json(plan.full_space[i]);
    if (plan.rep_index[i] < 0)
      entry["masked"] = true;
    else
      entry["rep"] = site_json(plan.injections[plan.rep_index[i]]);
    out["map"].push_back(std::move(entry));
  }
  return out;
}

ojson stats_json(const PruneStats& s) {
  ojson out;
  out["live_in_values"] = s.live_in_values;
  out["live_in_bits"] = s.live_in_bits;
  out["masked_bits"] = s.masked_bits;
  out["inferrable_bits"] = s.inferrable_bits;
  out["pruned_fraction"] = s.pruned_fraction;
  out["static"] = {{"sites", s.static_sites.sites},
                   {"masked", s.static_sites.masked},
                   {"live", s.static_sites.live},
                   {"live_classes", s.static_sites.live_classes}};
  return out;
}

ojson validation_json(const ValidationReport& r) {
  ojson out;
  out["sites"] = r.sites;
  out["pairs_sound_precise"] = r.pairs_sound_precise;
  out["pairs_sound_imprecise"] = r.pairs_sound_imprecise;
  out["pairs_unsound"] = r.pairs_unsound;
  out["pairs_distinct"] = r.pairs_distinct;
  out["masked_sites"] = r.masked_sites;
  out["masked_mismatches"] = r.masked_mismatches;
  out["ok"] = r.ok;
  return out;
}

ojson vulnerability_json(const VulnerabilityReport& r) {
  return {{"total_fault_space", r.total_fault_space},
          {"live_fault_sites", r.live_fault_sites}};
}

std::string trace_json_lines(const Trace& t) {
  std::string out;
  for (const TraceEvent& e : t.events) {
    ojson line = {{"cycle", e.cycle}, {"point", e.point}};
    if (e.write)
      line["write"] = {{"reg", e.write->first}, {"value", e.write->second}};
    if (e.branch_taken) line["branch_taken"] = *e.branch_taken;
    out += line.dump();
    out += '\n';
  }
  ojson last = {
      {"status", t.status == TermStatus::Returned ? "returned" : "cycle_limit"},
      {"cycles", t.cycles()}};
  if (t.status == TermStatus::Returned) last["value"] = t.ret_value;
  out += last.dump();
  out += '\n';
  return out;
}

CampaignPlan plan_from_json(const ojson& j) {
  CampaignPlan plan;
  std::map<std::tuple<long, unsigned, unsigned>, int> index;
  for (const ojson& s : j.at("injections")) {
    DynamicFaultSite site = site_from_json(s);
    index[{site.cycle, site.reg, site.bit}] =
        static_cast<int>(plan.injections.size());
    plan.injections.push_back(site);
  }
  for (const ojson& e : j.at("map")) {
    DynamicFaultSite site = site_from_json(e);
    plan.full_space.push_back(site);
    if (e.contains("masked") && e.at("masked").get<bool>()) {
      plan.rep_index.push_back(-1);
    } else {
      DynamicFaultSite rep = site_from_json(e.at("rep"));
      auto it = index.find({rep.cycle, rep.reg, rep.bit});
      if (it == index.end())
        throw std::runtime_error("plan map references unplanned injection");
      plan.rep_index.push_back(it->second);
    }
  }
  return plan;
}

std::vector<SiteClass> campaign_sites_from_json(const ojson& j) {
  std::vector<SiteClass> out;
  for (const ojson& r : j.at("results"))
    out.push_back({site_from_json(r), r.at("class").get<int>()});
  return out;
}

ojson expand_campaign_json(const ojson& plan_j, const ojson& campaign_j) {
  CampaignPlan plan = plan_from_json(plan_j);
  std::vector<SiteClass> runs = campaign_sites_from_json(campaign_j);
  if (runs.size() != plan.injections.size())
    throw std::runtime_error("campaign does not cover the plan");
  for (size_t i = 0; i < runs.size(); ++i)
    if (!(runs[i].site == plan.injections[i]))
      throw std::runtime_error("campaign sites do not match the plan");

  ojson out;
  out["runs"] = plan.full_space.size();
  out["results"] = ojson::array();
  std::set<int> used;
  for (size_t i = 0; i < plan.full_space.size(); ++i) {
    int cls = plan.rep_index[i] < 0 ? 0 : runs[plan.rep_index[i]].class_id;
    used.insert(cls);
    ojson rec = site_json(plan.full_space[i]);
    rec["class"] = cls;
    out["results"].push_back(std::move(rec));
  }
  out["classes"] = static_cast<int>(used.size());
  // Emit with the same key order as campaign_json.
  ojson ordered;
  ordered["runs"] = out["runs"];
  ordered["classes"] = out["classes"];
  ordered["results"] = std::move(out["results"]);
  return ordered;
}

std::optional<std::string> schema_mismatch(const ojson& value,
                                           const ojson& schema) {
  if (schema.contains("type")) {
    const std::string t = schema.at("type").get<std::string>();
    bool ok = (t == "object" && value.is_object()) ||
              (t == "array" && value.is_array()) ||
              (t == "string" && value.is_string()) ||
              (t == "number" && value.is_number()) ||
              (t == "integer" && value.is_number_integer()) ||
              (t == "boolean" && value.is_boolean());
    if (!ok) return "expected type " + t + ", got " + value.dump();
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const ojson& e : schema.at("enum")) ok = ok || e == value;
    if (!ok) return "value " + value.dump() + " not in enum";
  }
  if (schema.contains("required"))
    for (const ojson& k : schema.at("required"))
      if (!value.contains(k.get<std::string>()))
        return "missing required key " + k.get<std::string>();
  if (schema.contains("properties"))
    for (auto& [k, sub] : schema.at("properties").items())
      if (value.contains(k))
        if (auto err = schema_mismatch(value.at(k), sub))
          return k + ": " + *err;
  if (schema.contains("items") && value.is_array())
    for (const ojson& item : value)
      if (auto err = schema_mismatch(item, schema.at("items")))
        return "item: " + *err;
  return std::nullopt;
}

}  // namespace bitrel
