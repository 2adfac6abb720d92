//
// Copyright 2026 the careloop authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "careloop/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace careloop::harness {

using json = nlohmann::ordered_json;

const char* to_string(CoordinationMode m) {
  switch (m) {
    case CoordinationMode::none: return "none";
    case CoordinationMode::centralized: return "centralized";
    case CoordinationMode::decentralized: return "decentralized";
  }
  return "?";
}

bool parse_coordination_mode(const std::string& text, CoordinationMode& out) {
  if (text == "none") { out = CoordinationMode::none; return true; }
  if (text == "centralized") { out = CoordinationMode::centralized; return true; }
  if (text == "decentralized") { out = CoordinationMode::decentralized; return true; }
  return false;
}

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(Errc::parse_error, what);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    bad(where + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(where + ": field '" + key + "': " + e.what());
  }
}

sensing::SensorMode parse_mode(const json& j, const std::string& where) {
  const auto type = require<std::string>(j, "type", where);
  if (type == "time_based") {
    return sensing::TimeBased{require<SimTime>(j, "period_ms", where)};
  }
  if (type == "event_based") {
    const auto& pj = j.contains("predicate") ? j.at("predicate") : json::object();
    const auto ptype = require<std::string>(pj, "type", where + " predicate");
    if (ptype == "threshold_cross") {
      sensing::ThresholdCross tc;
      tc.level = require<double>(pj, "level", where);
      Direction dir;
      if (!parse_direction(require<std::string>(pj, "direction", where), dir)) {
        bad(where + ": bad direction");
      }
      tc.direction = dir;
      return sensing::EventBased{tc};
    }
    if (ptype == "delta_exceeds") {
      return sensing::EventBased{sensing::DeltaExceeds{require<double>(pj, "delta", where)}};
    }
    bad(where + ": unknown predicate type '" + ptype + "'");
  }
  bad(where + ": unknown sensor mode '" + type + "'");
}

rules::CorrectiveAction parse_action(const json& j, const std::string& where) {
  rules::CorrectiveAction action;
  const auto type = require<std::string>(j, "type", where);
  if (type == "notify") {
    action.kind = rules::ActionKind::notify;
    if (j.contains("party")) {
      action.notify_party = j.at("party").get<std::string>();
    } else if (j.contains("role")) {
      domain::PartyRole role;
      if (!domain::parse_party_role(j.at("role").get<std::string>(), role)) {
        bad(where + ": bad notify role");
      }
      action.notify_role = role;
    }
    if (j.contains("detail")) {
      domain::DetailLevel level;
      if (!domain::parse_detail_level(j.at("detail").get<std::string>(), level)) {
        bad(where + ": bad notify detail");
      }
      action.detail_override = level;
    }
  } else if (type == "adjust_sampling") {
    action.kind = rules::ActionKind::adjust_sampling;
    action.sensor = require<std::string>(j, "sensor", where);
    action.new_period_ms = require<SimTime>(j, "new_period_ms", where);
  } else if (type == "escalate") {
    action.kind = rules::ActionKind::escalate;
    action.to_loop = require<std::string>(j, "to_loop", where);
  } else if (type == "log") {
    action.kind = rules::ActionKind::log;
    action.text = require<std::string>(j, "text", where);
  } else {
    bad(where + ": unknown action type '" + type + "'");
  }
  return action;
}

}  // namespace

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) {
    bad("scenario root must be an object");
  }
  Scenario s;
  s.raw = j;
  s.seed = get_or<std::int64_t>(j, "seed", 0);
  s.duration_ms = require<SimTime>(j, "duration_ms", "scenario");
  s.history_capacity = get_or<std::size_t>(j, "history_capacity", 256);
  s.event_eval_tick_ms = get_or<SimTime>(j, "event_eval_tick_ms", 100);
  s.dump_histories = get_or<bool>(j, "dump_histories", false);

  const auto& topo = j.contains("topology") ? j.at("topology") : json::object();
  for (const auto& nj : get_or<json>(topo, "nodes", json::array())) {
    netsim::Node node;
    node.id = require<std::string>(nj, "id", "node");
    netsim::Layer layer;
    const auto layer_text = require<std::string>(nj, "layer", "node " + node.id);
    if (!netsim::parse_layer(layer_text, layer)) {
      bad("node " + node.id + ": unknown layer '" + layer_text + "'");
    }
    node.layer = layer;
    s.nodes.push_back(std::move(node));
  }
  for (const auto& lj : get_or<json>(topo, "links", json::array())) {
    netsim::Link link;
    link.a = require<std::string>(lj, "a", "link");
    link.b = require<std::string>(lj, "b", "link");
    link.latency_ms = require<SimTime>(lj, "latency_ms", "link " + link.a + "-" + link.b);
    link.overhead_bytes = get_or<std::uint64_t>(lj, "overhead_bytes", 0);
    s.links.push_back(std::move(link));
  }

  if (j.contains("size_schedule")) {
    for (const auto& [kind, size] : j.at("size_schedule").items()) {
      if (!size.is_number_unsigned()) {
        bad("size_schedule['" + kind + "'] must be a non-negative integer");
      }
      s.sizes.sizes[kind] = size.get<std::uint64_t>();
    }
  }

  for (const auto& ej : get_or<json>(j, "elements", json::array())) {
    domain::MonitoredElement element;
    element.id = require<std::string>(ej, "id", "element");
    const auto kind_text = require<std::string>(ej, "kind", "element " + element.id);
    if (!domain::parse_element_kind(kind_text, element.kind)) {
      bad("element " + element.id + ": unknown kind '" + kind_text + "'");
    }
    element.display_name = require<std::string>(ej, "display_name", "element " + element.id);
    if (ej.contains("medical_history")) {
      const auto& hj = ej.at("medical_history");
      for (const auto& cj : get_or<json>(hj, "conditions", json::array())) {
        element.medical_history.conditions.push_back(
            {require<std::string>(cj, "code", "condition"),
             get_or<std::string>(cj, "onset", "")});
      }
      for (const auto& bj : get_or<json>(hj, "baselines", json::array())) {
        domain::MedicalHistory::Baseline baseline;
        baseline.metric = require<std::string>(bj, "metric", "baseline");
        baseline.value = require<double>(bj, "value", "baseline " + baseline.metric);
        baseline.unit = get_or<std::string>(bj, "unit", "");
        element.medical_history.baselines.push_back(std::move(baseline));
      }
      element.medical_history.notes = get_or<std::string>(hj, "notes", "");
    }
    s.elements.push_back(std::move(element));
  }

  for (const auto& sj : get_or<json>(j, "sensors", json::array())) {
    ScenarioSensor sensor;
    sensor.desc.id = require<std::string>(sj, "id", "sensor");
    const std::string where = "sensor " + sensor.desc.id;
    const auto cat_text = require<std::string>(sj, "category", where);
    if (!domain::parse_sensor_category(cat_text, sensor.desc.category)) {
      bad(where + ": unknown category '" + cat_text + "'");
    }
    sensor.desc.metric_name = require<std::string>(sj, "metric", where);
    sensor.desc.metric_unit = get_or<std::string>(sj, "unit", "");
    sensor.desc.host_node = require<std::string>(sj, "host_node", where);
    sensor.desc.mode = parse_mode(require<json>(sj, "mode", where), where);

    if (sj.contains("trace")) {
      const auto& tj = sj.at("trace");
      sensor.trace.metric = sensor.desc.metric_name;
      const auto interp = get_or<std::string>(tj, "interpolation", "step");
      if (interp == "step") {
        sensor.trace.interpolation = sensing::Interpolation::step;
      } else if (interp == "linear") {
        sensor.trace.interpolation = sensing::Interpolation::linear;
      } else {
        bad(where + ": unknown interpolation '" + interp + "'");
      }
      for (const auto& pj : require<json>(tj, "points", where)) {
        if (!pj.is_array() || pj.size() != 2) {
          bad(where + ": trace points must be [t, value] pairs");
        }
        sensor.trace.points.push_back(
            {pj.at(0).get<SimTime>(), pj.at(1).get<double>()});
      }
    }
    if (sj.contains("activity_script")) {
      sensing::ActivityScript script;
      for (const auto& aj : sj.at("activity_script")) {
        sensing::ActivityScriptEntry entry;
        entry.t = require<SimTime>(aj, "t", where + " script");
        const auto state_text = require<std::string>(aj, "state", where + " script");
        if (!parse_activity_state(state_text, entry.state)) {
          bad(where + ": unknown activity state '" + state_text + "'");
        }
        entry.location = get_or<std::string>(aj, "location", "");
        script.entries.push_back(std::move(entry));
      }
      sensor.script = std::move(script);
    }
    s.sensors.push_back(std::move(sensor));
  }

  const json associations = get_or<json>(j, "associations", json::object());
  for (const auto& [element, list] : associations.items()) {
    for (const auto& sensor : list) {
      s.associations[element].push_back(sensor.get<std::string>());
    }
  }

  for (const auto& pj : get_or<json>(j, "parties", json::array())) {
    ScenarioParty party;
    party.party.id = require<std::string>(pj, "id", "party");
    const std::string where = "party " + party.party.id;
    const auto role_text = require<std::string>(pj, "role", where);
    if (!domain::parse_party_role(role_text, party.party.role)) {
      bad(where + ": unknown role '" + role_text + "'");
    }
    if (pj.contains("detail_level")) {
      const auto detail_text = pj.at("detail_level").get<std::string>();
      if (!domain::parse_detail_level(detail_text, party.party.detail_level)) {
        bad(where + ": unknown detail_level '" + detail_text + "'");
      }
    } else {
      party.party.detail_level = domain::default_detail_level(party.party.role);
    }
    party.node = require<std::string>(pj, "node", where);
    party.register_at_ms = get_or<SimTime>(pj, "register_at_ms", 0);
    s.parties.push_back(std::move(party));
  }

  const json interests = get_or<json>(j, "interests", json::object());
  for (const auto& [element, list] : interests.items()) {
    for (const auto& party : list) {
      s.interests[element].push_back(party.get<std::string>());
    }
  }

  for (const auto& dj : get_or<json>(j, "detectors", json::array())) {
    ScenarioDetector det;
    det.element = require<std::string>(dj, "element", "detector");
    const auto type = require<std::string>(dj, "type", "detector for " + det.element);
    const std::string where = "detector '" + type + "' for " + det.element;
    if (type == "threshold") {
      det.cfg.type = reasoning::DetectorType::threshold;
    } else if (type == "trend") {
      det.cfg.type = reasoning::DetectorType::trend;
    } else if (type == "fall") {
      det.cfg.type = reasoning::DetectorType::fall;
    } else {
      bad(where + ": unknown detector type");
    }
    det.cfg.kind = get_or<std::string>(dj, "kind", type == "fall" ? "fall" : "");
    det.cfg.metric = get_or<std::string>(dj, "metric", "");
    det.cfg.threshold = get_or<double>(dj, "threshold", 0.0);
    if (dj.contains("direction")) {
      Direction dir;
      if (!parse_direction(dj.at("direction").get<std::string>(), dir)) {
        bad(where + ": bad direction");
      }
      det.cfg.direction = dir;
    }
    det.cfg.window_size = get_or<int>(dj, "window_size", 2);
    det.cfg.forecast_lead_ms = get_or<SimTime>(dj, "forecast_lead_ms", 0);
    det.cfg.use_baseline_offset = get_or<bool>(dj, "use_baseline_offset", false);
    det.cfg.offset = get_or<double>(dj, "offset", 0.0);
    det.cfg.severity_band = get_or<double>(dj, "severity_band", 1.0);
    det.cfg.fall_max_gap_ms = get_or<SimTime>(dj, "fall_max_gap_ms", 0);
    s.detectors.push_back(std::move(det));
  }

  for (const auto& rj : get_or<json>(j, "rules", json::array())) {
    rules::Rule rule;
    rule.id = require<std::string>(rj, "id", "rule");
    const std::string where = "rule " + rule.id;
    rule.priority = get_or<int>(rj, "priority", 0);
    rule.enabled = get_or<bool>(rj, "enabled", true);
    const auto& wj = rj.contains("when") ? rj.at("when") : json::object();
    rule.condition.kind_pattern = get_or<std::string>(wj, "kind", "*");
    if (wj.contains("min_severity")) {
      Severity sev;
      if (!parse_severity(wj.at("min_severity").get<std::string>(), sev)) {
        bad(where + ": bad min_severity");
      }
      rule.condition.min_severity = sev;
    }
    if (wj.contains("guard")) {
      const auto& gj = wj.at("guard");
      rules::ContextGuard guard;
      guard.metric = require<std::string>(gj, "metric", where + " guard");
      rules::Comparator op;
      if (!rules::parse_comparator(require<std::string>(gj, "op", where), op)) {
        bad(where + ": bad guard op");
      }
      guard.op = op;
      guard.value = require<double>(gj, "value", where + " guard");
      rule.condition.guard = guard;
    }
    for (const auto& aj : get_or<json>(rj, "actions", json::array())) {
      rule.actions.push_back(parse_action(aj, where));
    }
    s.rules.push_back(std::move(rule));
  }

  for (const auto& lj : get_or<json>(j, "loops", json::array())) {
    control::ControlLoopSpec loop;
    loop.id = require<std::string>(lj, "id", "loop");
    const std::string where = "loop " + loop.id;
    loop.placement = require<std::string>(lj, "placement", where);
    const auto mode_text = get_or<std::string>(lj, "mode", "mape");
    if (!control::parse_loop_mode(mode_text, loop.mode)) {
      bad(where + ": unknown mode '" + mode_text + "'");
    }
    loop.analysis_node = get_or<std::string>(lj, "analysis_node", "");
    const auto role_text = get_or<std::string>(lj, "role", "local");
    if (!control::parse_loop_role(role_text, loop.role)) {
      bad(where + ": unknown role '" + role_text + "'");
    }
    for (const auto& element : get_or<json>(lj, "scope", json::array())) {
      loop.scope.insert(element.get<std::string>());
    }
    loop.region = get_or<std::string>(lj, "region", "");
    loop.cadence_ms = get_or<SimTime>(lj, "cadence_ms", 1000);
    loop.phase_ms = get_or<SimTime>(lj, "phase_ms", 0);
    loop.processing_ms = get_or<SimTime>(lj, "processing_ms", 1);
    s.loops.push_back(std::move(loop));
  }

  if (j.contains("coordination")) {
    const auto& cj = j.at("coordination");
    const auto mode_text = get_or<std::string>(cj, "mode", "none");
    if (!parse_coordination_mode(mode_text, s.coordination.mode)) {
      bad("coordination: unknown mode '" + mode_text + "'");
    }
    s.coordination.central_loop = get_or<std::string>(cj, "central_loop", "");
    s.coordination.epoch_ms = get_or<SimTime>(cj, "epoch_ms", 0);
    if (cj.contains("query")) {
      s.coordination.query.kind = get_or<std::string>(cj.at("query"), "kind", "");
      s.coordination.query.region = get_or<std::string>(cj.at("query"), "region", "");
    }
  }

  return s;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> problems;
  auto problem = [&](const std::string& text) { problems.push_back(text); };

  if (s.duration_ms <= 0) {
    problem("duration_ms must be > 0");
  }
  if (s.history_capacity == 0) {
    problem("history_capacity must be > 0");
  }
  if (s.event_eval_tick_ms <= 0) {
    problem("event_eval_tick_ms must be > 0");
  }

  // Topology
  std::map<NodeId, netsim::Layer> layer_of;
  for (const auto& node : s.nodes) {
    if (!layer_of.emplace(node.id, node.layer).second) {
      problem("duplicate node id '" + node.id + "'");
    }
  }
  auto node_exists = [&](const NodeId& id) { return layer_of.count(id) != 0; };

  static const std::set<std::pair<netsim::Layer, netsim::Layer>> kAllowedLinks = {
      {netsim::Layer::device, netsim::Layer::fog},
      {netsim::Layer::fog, netsim::Layer::fog},
      {netsim::Layer::fog, netsim::Layer::cloud},
      {netsim::Layer::cloud, netsim::Layer::cloud},
      {netsim::Layer::fog, netsim::Layer::application},
      {netsim::Layer::cloud, netsim::Layer::application},
  };
  for (const auto& link : s.links) {
    if (!node_exists(link.a)) {
      problem("link references unknown node '" + link.a + "'");
      continue;
    }
    if (!node_exists(link.b)) {
      problem("link references unknown node '" + link.b + "'");
      continue;
    }
    if (link.latency_ms < 0) {
      problem("link " + link.a + "-" + link.b + " has negative latency");
    }
    const int la = static_cast<int>(layer_of.at(link.a));
    const int lb = static_cast<int>(layer_of.at(link.b));
    if (kAllowedLinks.count({static_cast<netsim::Layer>(std::min(la, lb)),
                             static_cast<netsim::Layer>(std::max(la, lb))}) == 0) {
      problem("link " + link.a + "-" + link.b + " violates layer ordering (" +
              std::string(netsim::to_string(layer_of.at(link.a))) + "-" +
              netsim::to_string(layer_of.at(link.b)) + ")");
    }
  }

  static const std::set<std::string> kKnownKinds = {
      control::kMsgRawReading, control::kMsgContextSummary, control::kMsgPlanReply,
      control::kMsgInsight,    control::kMsgNotification,   control::kMsgCommand,
      control::kMsgAggregateReport};
  for (const auto& [kind, size] : s.sizes.sizes) {
    if (kKnownKinds.count(kind) == 0) {
      problem("size_schedule names unknown message kind '" + kind + "'");
    }
    if (size == 0) {
      problem("size_schedule['" + kind + "'] must be > 0");
    }
  }

  // Elements
  std::set<ElementId> element_ids;
  for (const auto& element : s.elements) {
    if (!element_ids.insert(element.id).second) {
      problem("duplicate element id '" + element.id + "'");
    }
    if (element.display_name.empty()) {
      problem("element '" + element.id + "' has empty display_name");
    }
    std::set<std::string> metrics;
    for (const auto& baseline : element.medical_history.baselines) {
      if (!metrics.insert(baseline.metric).second) {
        problem("element '" + element.id + "' has duplicate baseline for '" + baseline.metric +
                "'");
      }
    }
  }

  // Sensors
  std::set<SensorId> sensor_ids;
  for (const auto& sensor : s.sensors) {
    const auto& id = sensor.desc.id;
    if (!sensor_ids.insert(id).second) {
      problem("duplicate sensor id '" + id + "'");
    }
    if (sensor.desc.metric_name.empty()) {
      problem("sensor '" + id + "' has empty metric");
    }
    if (!node_exists(sensor.desc.host_node)) {
      problem("sensor '" + id + "' hosted on unknown node '" + sensor.desc.host_node + "'");
    } else if (layer_of.at(sensor.desc.host_node) != netsim::Layer::device) {
      problem("sensor '" + id + "' must be hosted on a device-layer node");
    }
    if (const auto* tb = std::get_if<sensing::TimeBased>(&sensor.desc.mode)) {
      if (tb->period_ms <= 0) {
        problem("sensor '" + id + "' time_based period_ms must be > 0");
      }
    }
    if (const auto* eb = std::get_if<sensing::EventBased>(&sensor.desc.mode)) {
      if (const auto* de = std::get_if<sensing::DeltaExceeds>(&eb->predicate)) {
        if (de->delta < 0) {
          problem("sensor '" + id + "' delta_exceeds delta must be >= 0");
        }
      }
    }
    if (sensor.desc.category == domain::SensorCategory::activity) {
      if (!sensor.script.has_value() || sensor.script->entries.empty()) {
        problem("activity sensor '" + id + "' needs a non-empty activity_script");
      } else {
        for (std::size_t i = 1; i < sensor.script->entries.size(); ++i) {
          if (sensor.script->entries[i].t <= sensor.script->entries[i - 1].t) {
            problem("activity sensor '" + id + "' script times must be strictly increasing");
            break;
          }
        }
      }
    } else {
      if (sensor.trace.points.empty()) {
        problem("sensor '" + id + "' needs a trace with at least one point");
      } else {
        for (std::size_t i = 1; i < sensor.trace.points.size(); ++i) {
          if (sensor.trace.points[i].t <= sensor.trace.points[i - 1].t) {
            problem("sensor '" + id + "' trace times must be strictly increasing");
            break;
          }
        }
      }
    }
  }

  // Associations: each sensor serves at most one element.
  std::map<SensorId, ElementId> owner;
  for (const auto& [element, list] : s.associations) {
    if (element_ids.count(element) == 0) {
      problem("association references unknown element '" + element + "'");
    }
    for (const auto& sensor : list) {
      if (sensor_ids.count(sensor) == 0) {
        problem("association references unknown sensor '" + sensor + "'");
        continue;
      }
      auto [it, inserted] = owner.emplace(sensor, element);
      if (!inserted) {
        problem("sensor '" + sensor + "' associated with both '" + it->second + "' and '" +
                element + "'");
      }
    }
  }

  // Parties and interests
  std::set<PartyId> party_ids;
  for (const auto& party : s.parties) {
    if (!party_ids.insert(party.party.id).second) {
      problem("duplicate party id '" + party.party.id + "'");
    }
    if (!node_exists(party.node)) {
      problem("party '" + party.party.id + "' on unknown node '" + party.node + "'");
    } else if (layer_of.at(party.node) != netsim::Layer::application) {
      problem("party '" + party.party.id + "' must live on an application-layer node");
    }
    if (party.register_at_ms < 0) {
      problem("party '" + party.party.id + "' register_at_ms must be >= 0");
    }
  }
  for (const auto& [element, list] : s.interests) {
    if (element_ids.count(element) == 0) {
      problem("interest references unknown element '" + element + "'");
    }
    std::set<PartyId> seen;
    for (const auto& party : list) {
      if (party_ids.count(party) == 0) {
        problem("interest references unknown party '" + party + "'");
      }
      if (!seen.insert(party).second) {
        problem("duplicate interest (" + element + ", " + party + ")");
      }
    }
  }

  // Detectors
  for (const auto& det : s.detectors) {
    if (element_ids.count(det.element) == 0) {
      problem("detector references unknown element '" + det.element + "'");
    }
    if (det.cfg.kind.empty()) {
      problem("detector for '" + det.element + "' has empty kind");
    }
    if (det.cfg.type != reasoning::DetectorType::fall && det.cfg.metric.empty()) {
      problem("detector '" + det.cfg.kind + "' has empty metric");
    }
    if (det.cfg.type == reasoning::DetectorType::trend) {
      if (det.cfg.window_size < 2) {
        problem("trend detector '" + det.cfg.kind + "' needs window_size >= 2");
      }
      if (det.cfg.forecast_lead_ms <= 0) {
        problem("trend detector '" + det.cfg.kind + "' needs forecast_lead_ms > 0");
      }
    }
  }

  // Rules
  std::set<std::string> rule_ids;
  std::set<LoopId> loop_ids;
  for (const auto& loop : s.loops) {
    loop_ids.insert(loop.id);
  }
  for (const auto& rule : s.rules) {
    if (!rule_ids.insert(rule.id).second) {
      problem("duplicate rule id '" + rule.id + "'");
    }
    if (rule.actions.empty()) {
      problem("rule '" + rule.id + "' has no actions");
    }
    for (const auto& action : rule.actions) {
      switch (action.kind) {
        case rules::ActionKind::notify:
          if (action.notify_party.has_value() && party_ids.count(*action.notify_party) == 0) {
            problem("rule '" + rule.id + "' notifies unknown party '" + *action.notify_party +
                    "'");
          }
          break;
        case rules::ActionKind::adjust_sampling:
          if (sensor_ids.count(action.sensor) == 0) {
            problem("rule '" + rule.id + "' adjusts unknown sensor '" + action.sensor + "'");
          }
          if (action.new_period_ms <= 0) {
            problem("rule '" + rule.id + "' adjust_sampling new_period_ms must be > 0");
          }
          break;
        case rules::ActionKind::escalate:
          if (loop_ids.count(action.to_loop) == 0) {
            problem("rule '" + rule.id + "' escalates to unknown loop '" + action.to_loop + "'");
          }
          break;
        case rules::ActionKind::log:
          break;
      }
    }
  }

  // Loops
  netsim::Topology topo;
  for (const auto& node : s.nodes) {
    if (layer_of.count(node.id) != 0) {
      try {
        topo.add_node(node);
      } catch (const Error&) {
      }
    }
  }
  for (const auto& link : s.links) {
    if (node_exists(link.a) && node_exists(link.b) && link.latency_ms >= 0) {
      topo.add_link(link);
    }
  }
  auto reachable = [&](const NodeId& a, const NodeId& b) {
    return node_exists(a) && node_exists(b) && topo.route(a, b).has_value();
  };

  std::set<LoopId> seen_loops;
  std::map<ElementId, int> coverage;
  for (const auto& loop : s.loops) {
    if (!seen_loops.insert(loop.id).second) {
      problem("duplicate loop id '" + loop.id + "'");
    }
    if (!node_exists(loop.placement)) {
      problem("loop '" + loop.id + "' placed on unknown node '" + loop.placement + "'");
    } else {
      const auto layer = layer_of.at(loop.placement);
      if (layer != netsim::Layer::fog && layer != netsim::Layer::cloud) {
        problem("loop '" + loop.id + "' must be placed on a fog or cloud node");
      }
    }
    if (loop.cadence_ms <= 0) {
      problem("loop '" + loop.id + "' cadence_ms must be > 0");
    }
    if (loop.phase_ms < 0 || (loop.cadence_ms > 0 && loop.phase_ms >= loop.cadence_ms)) {
      problem("loop '" + loop.id + "' phase_ms must be in [0, cadence_ms)");
    }
    if (loop.processing_ms < 0) {
      problem("loop '" + loop.id + "' processing_ms must be >= 0");
    }
    if (loop.mode == control::LoopMode::apaas) {
      if (loop.analysis_node.empty()) {
        problem("apaas loop '" + loop.id + "' needs analysis_node");
      } else if (!node_exists(loop.analysis_node)) {
        problem("apaas loop '" + loop.id + "' analysis_node '" + loop.analysis_node +
                "' unknown");
      } else if (!reachable(loop.placement, loop.analysis_node)) {
        problem("apaas loop '" + loop.id + "' has no route to its analysis node");
      }
      if (loop.role == control::LoopRole::central) {
        problem("central loop '" + loop.id + "' cannot offload analysis");
      }
    }
    for (const auto& element : loop.scope) {
      if (element_ids.count(element) == 0) {
        problem("loop '" + loop.id + "' scopes unknown element '" + element + "'");
      } else if (loop.role != control::LoopRole::central) {
        coverage[element] += 1;
      }
    }
  }
  for (const auto& element : element_ids) {
    const auto it = coverage.find(element);
    const int n = it == coverage.end() ? 0 : it->second;
    if (n == 0) {
      problem("element '" + element + "' is not scoped by any local loop");
    } else if (n > 1) {
      problem("element '" + element + "' is scoped by " + std::to_string(n) + " loops");
    }
  }

  // Connectivity: device hosts must reach their owning loop; loops must reach
  // the application nodes of interested parties.
  std::map<ElementId, const control::ControlLoopSpec*> loop_of_element;
  for (const auto& loop : s.loops) {
    if (loop.role == control::LoopRole::central) {
      continue;
    }
    for (const auto& element : loop.scope) {
      loop_of_element[element] = &loop;
    }
  }
  for (const auto& [element, list] : s.associations) {
    auto it = loop_of_element.find(element);
    if (it == loop_of_element.end()) {
      continue;
    }
    for (const auto& sensor_id : list) {
      auto sensor_it = std::find_if(s.sensors.begin(), s.sensors.end(), [&](const auto& sc) {
        return sc.desc.id == sensor_id;
      });
      if (sensor_it == s.sensors.end()) {
        continue;
      }
      if (node_exists(sensor_it->desc.host_node) && node_exists(it->second->placement) &&
          !reachable(sensor_it->desc.host_node, it->second->placement)) {
        problem("sensor '" + sensor_id + "' host '" + sensor_it->desc.host_node +
                "' cannot reach loop '" + it->second->id + "' at '" + it->second->placement +
                "'");
      }
    }
  }
  for (const auto& [element, list] : s.interests) {
    auto it = loop_of_element.find(element);
    if (it == loop_of_element.end()) {
      continue;
    }
    for (const auto& party_id : list) {
      auto party_it = std::find_if(s.parties.begin(), s.parties.end(), [&](const auto& p) {
        return p.party.id == party_id;
      });
      if (party_it == s.parties.end()) {
        continue;
      }
      if (node_exists(party_it->node) && node_exists(it->second->placement) &&
          !reachable(it->second->placement, party_it->node)) {
        problem("loop '" + it->second->id + "' cannot reach party '" + party_id + "' at '" +
                party_it->node + "'");
      }
    }
  }

  // Coordination
  const auto& coord = s.coordination;
  if (coord.mode == CoordinationMode::centralized) {
    if (coord.central_loop.empty()) {
      problem("centralized coordination needs central_loop");
    } else {
      auto it = std::find_if(s.loops.begin(), s.loops.end(), [&](const auto& l) {
        return l.id == coord.central_loop;
      });
      if (it == s.loops.end()) {
        problem("central_loop '" + coord.central_loop + "' is not a configured loop");
      } else if (it->role != control::LoopRole::central) {
        problem("central_loop '" + coord.central_loop + "' must have role central");
      }
    }
    if (coord.epoch_ms > 0 && coord.query.kind.empty()) {
      problem("centralized coordination with epochs needs query.kind");
    }
  } else if (coord.mode == CoordinationMode::decentralized) {
    const auto peers = std::count_if(s.loops.begin(), s.loops.end(), [](const auto& l) {
      return l.role == control::LoopRole::peer;
    });
    if (peers == 0) {
      problem("decentralized coordination needs at least one peer loop");
    }
    if (coord.epoch_ms > 0 && coord.query.kind.empty()) {
      problem("decentralized coordination with epochs needs query.kind");
    }
    if (!coord.central_loop.empty()) {
      problem("decentralized coordination must not name a central_loop");
    }
  }
  if (coord.epoch_ms < 0) {
    problem("epoch_ms must be >= 0");
  }

  return problems;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::parse_error, "cannot open '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, std::string("invalid JSON in '") + path + "': " + e.what());
  }
  Scenario s = parse_scenario(j);
  auto problems = validate_scenario(s);
  if (!problems.empty()) {
    throw ValidationError(std::move(problems));
  }
  return s;
}

}  // namespace careloop::harness
