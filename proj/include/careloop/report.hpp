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

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "careloop/types.hpp"

namespace careloop::harness {

struct InsightRecord {
  SimTime tick = 0;
  LoopId loop;
  ElementId element;
  std::string kind;
  std::string severity;
  bool predicted = false;
  SimTime lead_ms = 0;
  double confidence = 1.0;
  SimTime detected_at = 0;
  std::vector<SimTime> evidence;
  std::string explanation;
};

struct ActionRecord {
  SimTime tick = 0;
  LoopId loop;
  std::string rule;
  ElementId element;
  std::string description;
};

struct NotificationRecord {
  PartyId party;
  ElementId element;
  std::uint64_t version = 0;
  SimTime emitted_at = 0;
  std::string detail;
  std::string payload;
};

struct AggregateRecord {
  std::uint64_t epoch = 0;
  std::string kind;
  std::string region;
  std::uint64_t affected = 0;
  std::uint64_t total = 0;
  double percentage = 0.0;
  LoopId computed_by;
  SimTime computed_at = 0;

  bool same_value(const AggregateRecord& other) const {
    return epoch == other.epoch && kind == other.kind && region == other.region &&
           affected == other.affected && total == other.total && percentage == other.percentage;
  }
};

struct LatencyStats {
  std::uint64_t count = 0;
  std::int64_t sum_ms = 0;
  SimTime min_ms = 0;
  SimTime max_ms = 0;
  double mean_ms = 0.0;
};

/// Everything one simulation run produced: measured traffic and latency,
/// the insight/action/notification record, aggregation outcomes, and an echo
/// of the scenario that generated it.
struct RunReport {
  nlohmann::ordered_json config_echo;
  SimTime duration_ms = 0;
  std::int64_t seed = 0;
  std::int64_t wall_clock_ms = 0;
  std::uint64_t event_count = 0;

  std::map<LoopId, std::uint64_t> iterations;
  std::vector<InsightRecord> insights;
  std::vector<ActionRecord> actions;
  std::vector<NotificationRecord> notifications;
  std::map<ElementId, std::vector<SimTime>> version_bumps;
  std::vector<AggregateRecord> aggregates;

  std::map<std::string, std::uint64_t> layer_ingress_bytes;  // layer name -> bytes
  std::map<std::string, std::uint64_t> bytes_by_kind;
  std::map<std::string, std::uint64_t> link_hop_messages;
  std::map<LoopId, LatencyStats> latency;
  std::map<LoopId, std::vector<SimTime>> latency_samples;
  std::map<LoopId, std::uint64_t> remote_timeouts;
  std::map<LoopId, std::uint64_t> escalations_received;

  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t in_flight_at_end = 0;

  std::vector<std::string> diagnostics;
  nlohmann::ordered_json context_histories;  // present when the scenario asks for a dump

  std::uint64_t notification_count(const PartyId& party, const ElementId& element) const;
};

nlohmann::ordered_json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::ordered_json& j);

bool operator==(const RunReport& a, const RunReport& b);

/// Human-readable summary (the `--format text` rendering).
std::string render_text(const RunReport& report);

}  // namespace careloop::harness
