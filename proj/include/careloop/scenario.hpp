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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "careloop/control_plane.hpp"
#include "careloop/domain_model.hpp"
#include "careloop/netsim.hpp"
#include "careloop/rule_engine.hpp"
#include "careloop/sensing.hpp"

namespace careloop::harness {

struct ScenarioSensor {
  domain::SensorDescriptor desc;
  sensing::SignalTrace trace;                        // value sensors
  std::optional<sensing::ActivityScript> script;     // activity sensors
};

struct ScenarioParty {
  domain::InterestedParty party;
  NodeId node;
  SimTime register_at_ms = 0;
};

struct ScenarioDetector {
  ElementId element;
  reasoning::DetectorConfig cfg;
};

enum class CoordinationMode { none, centralized, decentralized };

const char* to_string(CoordinationMode m);
bool parse_coordination_mode(const std::string& text, CoordinationMode& out);

struct Coordination {
  CoordinationMode mode = CoordinationMode::none;
  LoopId central_loop;
  SimTime epoch_ms = 0;  // 0 disables epoch aggregation
  control::AggregateQuery query;
};

/// One reproducible experiment: everything a run needs, resolved and
/// validated, including the seed.
struct Scenario {
  std::int64_t seed = 0;
  SimTime duration_ms = 0;
  std::size_t history_capacity = 256;
  SimTime event_eval_tick_ms = 100;
  bool dump_histories = false;

  std::vector<netsim::Node> nodes;
  std::vector<netsim::Link> links;
  control::SizeSchedule sizes = control::SizeSchedule::defaults();

  std::vector<domain::MonitoredElement> elements;
  std::vector<ScenarioSensor> sensors;
  std::map<ElementId, std::vector<SensorId>> associations;
  std::vector<ScenarioParty> parties;
  std::map<ElementId, std::vector<PartyId>> interests;
  std::vector<ScenarioDetector> detectors;
  std::vector<rules::Rule> rules;
  std::vector<control::ControlLoopSpec> loops;
  Coordination coordination;

  nlohmann::ordered_json raw;  // config echo for the report
};

/// Structural parse; throws ParseError on malformed JSON or wrong types.
Scenario parse_scenario(const nlohmann::ordered_json& j);

/// Every semantic problem found, empty when the scenario is sound.
std::vector<std::string> validate_scenario(const Scenario& scenario);

/// Parse + validate from a file; throws ParseError or ValidationError.
Scenario load_scenario(const std::string& path);

}  // namespace careloop::harness
