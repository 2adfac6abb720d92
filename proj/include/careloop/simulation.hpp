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

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "careloop/control_plane.hpp"
#include "careloop/domain_model.hpp"
#include "careloop/netsim.hpp"
#include "careloop/report.hpp"
#include "careloop/scenario.hpp"

namespace careloop::harness {

/// Builds a full simulation from a validated scenario and drives it to the
/// configured duration. One instance runs once.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  RunReport run(std::function<void(const NotificationRecord&)> on_notification = nullptr);

  const netsim::EventLog& event_log() const { return log_; }

  /// Cross-count identities that must hold in every report; non-empty means a
  /// runtime invariant broke (CLI exit code 2).
  static std::vector<std::string> verify_report(const Scenario& scenario,
                                                const RunReport& report);

 private:
  struct SensorRuntime {
    sensing::SensorState state;
    domain::SensorCategory category = domain::SensorCategory::physiological;
    sensing::SignalTrace trace;  // activity sensors carry a code trace built from the script
    std::optional<sensing::ActivityScript> script;
    NodeId host;
    std::uint64_t generation = 0;
    bool time_based = true;
  };

  void install_registry();
  void install_topology();
  void install_loops();
  void install_sensors();
  void install_dispatchers();
  void schedule_poll(const SensorId& id, SimTime at, std::uint64_t generation);
  void schedule_event_eval(const SensorId& id, SimTime at);
  void emit_reading(SensorRuntime& rt, sensing::Reading reading);
  void apply_sampling_change(const control::CommandEnvelope& cmd, const NodeId& at_node);
  void dispatch(const netsim::Message& msg);

  Scenario scenario_;
  netsim::Kernel kernel_;
  netsim::Topology topology_;
  netsim::Metrics metrics_;
  netsim::EventLog log_;
  netsim::Network network_;
  domain::Registry registry_;
  RunReport report_;
  control::SimServices services_;
  std::map<LoopId, std::unique_ptr<control::ControlLoopRuntime>> loops_;
  std::map<LoopId, std::unique_ptr<control::ApaasService>> apaas_;
  std::map<SensorId, SensorRuntime> sensors_;
  std::map<ElementId, LoopId> loop_of_element_;
  bool ran_ = false;
};

/// Convenience wrapper: build, run, and return (report, event log text).
struct RunResult {
  RunReport report;
  std::string event_log;
};

RunResult run_scenario(const Scenario& scenario,
                       std::function<void(const NotificationRecord&)> on_notification = nullptr);

}  // namespace careloop::harness
