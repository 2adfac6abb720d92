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

#include "careloop/report.hpp"

#include <sstream>

namespace careloop::harness {

using json = nlohmann::ordered_json;

std::uint64_t RunReport::notification_count(const PartyId& party, const ElementId& element) const {
  std::uint64_t n = 0;
  for (const auto& rec : notifications) {
    if (rec.party == party && rec.element == element) {
      ++n;
    }
  }
  return n;
}

namespace {

json insight_to_json(const InsightRecord& r) {
  return json{{"tick", r.tick},
              {"loop", r.loop},
              {"element", r.element},
              {"kind", r.kind},
              {"severity", r.severity},
              {"predicted", r.predicted},
              {"lead_ms", r.lead_ms},
              {"confidence", r.confidence},
              {"detected_at", r.detected_at},
              {"evidence", r.evidence},
              {"explanation", r.explanation}};
}

InsightRecord insight_from_json(const json& j) {
  InsightRecord r;
  r.tick = j.at("tick").get<SimTime>();
  r.loop = j.at("loop").get<std::string>();
  r.element = j.at("element").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.severity = j.at("severity").get<std::string>();
  r.predicted = j.at("predicted").get<bool>();
  r.lead_ms = j.at("lead_ms").get<SimTime>();
  r.confidence = j.at("confidence").get<double>();
  r.detected_at = j.at("detected_at").get<SimTime>();
  r.evidence = j.at("evidence").get<std::vector<SimTime>>();
  r.explanation = j.at("explanation").get<std::string>();
  return r;
}

json action_to_json(const ActionRecord& r) {
  return json{{"tick", r.tick},
              {"loop", r.loop},
              {"rule", r.rule},
              {"element", r.element},
              {"description", r.description}};
}

ActionRecord action_from_json(const json& j) {
  ActionRecord r;
  r.tick = j.at("tick").get<SimTime>();
  r.loop = j.at("loop").get<std::string>();
  r.rule = j.at("rule").get<std::string>();
  r.element = j.at("element").get<std::string>();
  r.description = j.at("description").get<std::string>();
  return r;
}

json notification_to_json(const NotificationRecord& r) {
  return json{{"party", r.party},       {"element", r.element},
              {"version", r.version},   {"emitted_at", r.emitted_at},
              {"detail", r.detail},     {"payload", r.payload}};
}

NotificationRecord notification_from_json(const json& j) {
  NotificationRecord r;
  r.party = j.at("party").get<std::string>();
  r.element = j.at("element").get<std::string>();
  r.version = j.at("version").get<std::uint64_t>();
  r.emitted_at = j.at("emitted_at").get<SimTime>();
  r.detail = j.at("detail").get<std::string>();
  r.payload = j.at("payload").get<std::string>();
  return r;
}

json aggregate_to_json(const AggregateRecord& r) {
  return json{{"epoch", r.epoch},
              {"kind", r.kind},
              {"region", r.region},
              {"affected", r.affected},
              {"total", r.total},
              {"percentage", r.percentage},
              {"computed_by", r.computed_by},
              {"computed_at", r.computed_at}};
}

AggregateRecord aggregate_from_json(const json& j) {
  AggregateRecord r;
  r.epoch = j.at("epoch").get<std::uint64_t>();
  r.kind = j.at("kind").get<std::string>();
  r.region = j.at("region").get<std::string>();
  r.affected = j.at("affected").get<std::uint64_t>();
  r.total = j.at("total").get<std::uint64_t>();
  r.percentage = j.at("percentage").get<double>();
  r.computed_by = j.at("computed_by").get<std::string>();
  r.computed_at = j.at("computed_at").get<SimTime>();
  return r;
}

json latency_to_json(const LatencyStats& s) {
  return json{{"count", s.count},
              {"sum_ms", s.sum_ms},
              {"min_ms", s.min_ms},
              {"max_ms", s.max_ms},
              {"mean_ms", s.mean_ms}};
}

LatencyStats latency_from_json(const json& j) {
  LatencyStats s;
  s.count = j.at("count").get<std::uint64_t>();
  s.sum_ms = j.at("sum_ms").get<std::int64_t>();
  s.min_ms = j.at("min_ms").get<SimTime>();
  s.max_ms = j.at("max_ms").get<SimTime>();
  s.mean_ms = j.at("mean_ms").get<double>();
  return s;
}

}  // namespace

json to_json(const RunReport& report) {
  json j;
  j["config_echo"] = report.config_echo;
  j["duration_ms"] = report.duration_ms;
  j["seed"] = report.seed;
  j["wall_clock_ms"] = report.wall_clock_ms;
  j["event_count"] = report.event_count;
  j["iterations"] = report.iterations;

  json insights = json::array();
  for (const auto& r : report.insights) insights.push_back(insight_to_json(r));
  j["insights"] = std::move(insights);

  json actions = json::array();
  for (const auto& r : report.actions) actions.push_back(action_to_json(r));
  j["actions"] = std::move(actions);

  json notifications = json::array();
  for (const auto& r : report.notifications) notifications.push_back(notification_to_json(r));
  j["notifications"] = std::move(notifications);

  j["version_bumps"] = report.version_bumps;

  json aggregates = json::array();
  for (const auto& r : report.aggregates) aggregates.push_back(aggregate_to_json(r));
  j["aggregates"] = std::move(aggregates);

  j["layer_ingress_bytes"] = report.layer_ingress_bytes;
  j["bytes_by_kind"] = report.bytes_by_kind;
  j["link_hop_messages"] = report.link_hop_messages;

  json latency;
  for (const auto& [loop, stats] : report.latency) latency[loop] = latency_to_json(stats);
  j["latency"] = latency.is_null() ? json::object() : latency;
  j["latency_samples"] = report.latency_samples;
  j["remote_timeouts"] = report.remote_timeouts;
  j["escalations_received"] = report.escalations_received;

  j["messages_sent"] = report.messages_sent;
  j["messages_delivered"] = report.messages_delivered;
  j["in_flight_at_end"] = report.in_flight_at_end;
  j["diagnostics"] = report.diagnostics;
  j["context_histories"] = report.context_histories;
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.config_echo = j.at("config_echo");
  r.duration_ms = j.at("duration_ms").get<SimTime>();
  r.seed = j.at("seed").get<std::int64_t>();
  r.wall_clock_ms = j.at("wall_clock_ms").get<std::int64_t>();
  r.event_count = j.at("event_count").get<std::uint64_t>();
  r.iterations = j.at("iterations").get<std::map<LoopId, std::uint64_t>>();
  for (const auto& item : j.at("insights")) r.insights.push_back(insight_from_json(item));
  for (const auto& item : j.at("actions")) r.actions.push_back(action_from_json(item));
  for (const auto& item : j.at("notifications"))
    r.notifications.push_back(notification_from_json(item));
  r.version_bumps = j.at("version_bumps").get<std::map<ElementId, std::vector<SimTime>>>();
  for (const auto& item : j.at("aggregates")) r.aggregates.push_back(aggregate_from_json(item));
  r.layer_ingress_bytes =
      j.at("layer_ingress_bytes").get<std::map<std::string, std::uint64_t>>();
  r.bytes_by_kind = j.at("bytes_by_kind").get<std::map<std::string, std::uint64_t>>();
  r.link_hop_messages = j.at("link_hop_messages").get<std::map<std::string, std::uint64_t>>();
  for (const auto& [loop, stats] : j.at("latency").items()) {
    r.latency[loop] = latency_from_json(stats);
  }
  r.latency_samples = j.at("latency_samples").get<std::map<LoopId, std::vector<SimTime>>>();
  r.remote_timeouts = j.at("remote_timeouts").get<std::map<LoopId, std::uint64_t>>();
  r.escalations_received =
      j.at("escalations_received").get<std::map<LoopId, std::uint64_t>>();
  r.messages_sent = j.at("messages_sent").get<std::uint64_t>();
  r.messages_delivered = j.at("messages_delivered").get<std::uint64_t>();
  r.in_flight_at_end = j.at("in_flight_at_end").get<std::uint64_t>();
  r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  r.context_histories = j.at("context_histories");
  return r;
}

bool operator==(const RunReport& a, const RunReport& b) {
  return to_json(a) == to_json(b);
}

std::string render_text(const RunReport& report) {
  std::ostringstream out;
  out << "run: duration " << report.duration_ms << " ms, seed " << report.seed << ", "
      << report.event_count << " events, wall " << report.wall_clock_ms << " ms\n";
  out << "messages: sent " << report.messages_sent << ", delivered " << report.messages_delivered
      << ", in flight at end " << report.in_flight_at_end << "\n";

  out << "iterations:";
  for (const auto& [loop, n] : report.iterations) {
    out << " " << loop << "=" << n;
  }
  out << "\n";

  out << "layer ingress bytes:";
  for (const auto& [layer, bytes] : report.layer_ingress_bytes) {
    out << " " << layer << "=" << bytes;
  }
  out << "\n";

  for (const auto& [loop, stats] : report.latency) {
    out << "decision latency " << loop << ": mean " << format_double(stats.mean_ms)
        << " ms over " << stats.count << " samples (min " << stats.min_ms << ", max "
        << stats.max_ms << ")\n";
  }

  out << "insights: " << report.insights.size() << ", actions: " << report.actions.size()
      << ", notifications: " << report.notifications.size() << "\n";

  for (const auto& agg : report.aggregates) {
    out << "aggregate epoch " << agg.epoch << " [" << agg.kind << " @ " << agg.region
        << "]: " << agg.affected << "/" << agg.total << " = " << format_double(agg.percentage)
        << "% (by " << agg.computed_by << ")\n";
  }

  if (const auto n = report.remote_timeouts.size(); n != 0) {
    out << "remote timeouts:";
    for (const auto& [loop, count] : report.remote_timeouts) {
      out << " " << loop << "=" << count;
    }
    out << "\n";
  }
  if (!report.diagnostics.empty()) {
    out << "diagnostics (" << report.diagnostics.size() << "):\n";
    for (const auto& d : report.diagnostics) {
      out << "  " << d << "\n";
    }
  }
  return out.str();
}

}  // namespace careloop::harness
