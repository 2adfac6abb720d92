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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "careloop/context_mgmt.hpp"
#include "careloop/domain_model.hpp"
#include "careloop/netsim.hpp"
#include "careloop/presentation.hpp"
#include "careloop/reasoning.hpp"
#include "careloop/report.hpp"
#include "careloop/rule_engine.hpp"
#include "careloop/sensing.hpp"

namespace careloop::control {

enum class LoopMode { mape, apaas };
enum class LoopRole { local, central, peer };

const char* to_string(LoopMode m);
const char* to_string(LoopRole r);
bool parse_loop_mode(const std::string& text, LoopMode& out);
bool parse_loop_role(const std::string& text, LoopRole& out);

/// One MAPE-K loop: where it runs, which elements it manages, and how its
/// phases are placed. A full local loop (mape) keeps all four activities at
/// `placement`; an offloaded loop (apaas) keeps Monitor and Execute local and
/// sends Analyze + Plan to a service at `analysis_node`.
struct ControlLoopSpec {
  LoopId id;
  NodeId placement;            // fog or cloud node
  LoopMode mode = LoopMode::mape;
  NodeId analysis_node;        // apaas only
  LoopRole role = LoopRole::local;
  std::set<ElementId> scope;
  std::string region;
  SimTime cadence_ms = 1000;
  SimTime phase_ms = 0;        // tick offset; lets a scenario align ticks with arrivals
  SimTime processing_ms = 1;   // analyze+plan compute time
};

/// Message sizes by kind, declared in the scenario so bandwidth results are
/// checkable arithmetic rather than measurements of our encodings.
struct SizeSchedule {
  std::map<std::string, std::uint64_t> sizes;

  std::uint64_t of(const std::string& kind) const;
  static SizeSchedule defaults();
};

inline constexpr const char* kMsgRawReading = "raw_reading";
inline constexpr const char* kMsgContextSummary = "context_summary";
inline constexpr const char* kMsgPlanReply = "plan_reply";
inline constexpr const char* kMsgInsight = "insight";
inline constexpr const char* kMsgNotification = "notification";
inline constexpr const char* kMsgCommand = "command";
inline constexpr const char* kMsgAggregateReport = "aggregate_report";

// ---------------------------------------------------------------------------
// Aggregation (centralized master-slave and decentralized peers)

struct AggregateQuery {
  std::string kind;
  std::string region;
};

struct AggregateReport {
  LoopId from;
  std::uint64_t epoch = 0;
  std::uint64_t affected = 0;
  std::uint64_t total = 0;
};

struct AggregationOutcome {
  harness::AggregateRecord result;
  std::vector<LoopId> missing;  // reporters that never arrived (counted as zero)
};

/// Master side of the master-slave arrangement: sums the received reports,
/// counting absent reporters as zero-affected.
AggregationOutcome central_aggregate(const AggregateQuery& query, std::uint64_t epoch,
                                     const std::set<LoopId>& expected,
                                     const std::map<LoopId, AggregateReport>& received,
                                     const LoopId& computed_by, SimTime computed_at);

/// Peer side: every peer folds the full broadcast set, so all peers hold the
/// same result. Returns one record per peer.
std::map<LoopId, harness::AggregateRecord> peer_exchange(
    const AggregateQuery& query, std::uint64_t epoch,
    const std::map<LoopId, AggregateReport>& reports, SimTime computed_at);

// ---------------------------------------------------------------------------
// Message payloads

struct ReadingEnvelope {
  LoopId target_loop;
  sensing::Reading reading;
};

struct SummaryRequest {
  LoopId requester;
  NodeId reply_to;
  ElementId element;
  std::uint64_t iteration = 0;
  std::vector<context::ContextSnapshot> window;
};

struct PlanReply {
  LoopId requester;
  ElementId element;
  std::uint64_t iteration = 0;
  std::vector<reasoning::Insight> insights;
  std::vector<rules::RuleFiring> firings;
  std::vector<std::string> diagnostics;
};

struct InsightEnvelope {
  LoopId from;
  LoopId to_loop;
  reasoning::Insight insight;
};

struct CommandEnvelope {
  SensorId sensor;
  SimTime new_period_ms = 0;
};

struct NotificationEnvelope {
  PartyId party;
  ElementId element;
  std::uint64_t version = 0;
};

struct AggregateEnvelope {
  LoopId to;
  AggregateReport report;
};

// ---------------------------------------------------------------------------
// Runtime

/// The loop-private store behind the four activities. Nothing outside the
/// owning loop (or its APaaS replica, populated once at setup) touches it.
struct KnowledgeBase {
  std::map<ElementId, domain::MedicalHistory> medical;
  std::map<ElementId, context::ContextHistory> histories;
  std::map<ElementId, std::vector<reasoning::DetectorConfig>> detectors;
  rules::RuleSet ruleset;
  std::map<ElementId, presentation::StatusModel> models;
  std::map<ElementId, std::set<std::string>> active_keys;  // insight keys from last iteration
  std::map<ElementId, std::uint64_t> last_notified_version;
};

struct SimServices;  // defined below; bundles kernel, network, registry, report

class ApaasService;

/// Event-driven realization of one control loop inside the simulation kernel.
/// Ticks fire at phase + k * cadence; each tick drains the reading inbox,
/// assembles context, reasons and plans (locally or via the APaaS service),
/// and executes the plan processing_ms later.
class ControlLoopRuntime {
 public:
  ControlLoopRuntime(ControlLoopSpec spec, SimServices& services);

  void install(SimTime horizon);  // schedules ticks and epoch events
  void handle_message(const netsim::Message& msg);

  const ControlLoopSpec& spec() const { return spec_; }
  KnowledgeBase& knowledge() { return kb_; }

  // Aggregation wiring, configured by the simulation when coordination is on.
  void configure_aggregation(const AggregateQuery& query, SimTime epoch_ms,
                             std::set<LoopId> expected_reporters,
                             std::map<LoopId, NodeId> reporter_nodes);

  AggregateReport local_aggregate_counts(std::uint64_t epoch) const;

 private:
  void heartbeat(SimTime horizon);
  void run_iteration(SimTime now);
  void execute(const ElementId& element, const std::vector<reasoning::Insight>& insights,
               const std::vector<rules::RuleFiring>& firings, SimTime now,
               const std::map<std::string, SimTime>& earliest_emission);
  void epoch_tick(std::uint64_t epoch);
  void handle_aggregate(const AggregateEnvelope& env, SimTime now);
  void maybe_finish_epoch(std::uint64_t epoch);
  void finish_epoch(std::uint64_t epoch, SimTime now);
  std::vector<domain::InterestedParty> observers_of(const ElementId& element) const;
  void log(const std::string& kind, const std::string& details) const;

  ControlLoopSpec spec_;
  SimServices& services_;
  KnowledgeBase kb_;
  std::vector<sensing::Reading> inbox_;
  std::uint64_t iteration_ = 0;
  std::vector<netsim::LatencyTag> pending_notification_tags_;
  // APaaS bookkeeping: which elements still owe a reply for which iteration.
  std::uint64_t pending_iteration_ = 0;
  std::set<ElementId> awaiting_replies_;
  std::map<ElementId, std::map<std::string, SimTime>> pending_emissions_;
  // Aggregation state (central or peer side).
  std::optional<AggregateQuery> agg_query_;
  SimTime epoch_ms_ = 0;
  std::set<LoopId> expected_reporters_;
  std::map<LoopId, NodeId> reporter_nodes_;
  std::map<std::uint64_t, std::map<LoopId, AggregateReport>> epoch_reports_;
  std::set<std::uint64_t> epochs_done_;
};

/// The cloud-side Analyze + Plan service for one offloaded loop, holding a
/// replica of that loop's configs and rules made at setup.
class ApaasService {
 public:
  ApaasService(LoopId for_loop, NodeId node, SimTime processing_ms, SimServices& services);

  void replicate(const ElementId& element, domain::MedicalHistory medical,
                 std::vector<reasoning::DetectorConfig> detectors);
  void set_ruleset(rules::RuleSet ruleset);

  void handle_request(const SummaryRequest& request);
  const NodeId& node() const { return node_; }

 private:
  LoopId for_loop_;
  NodeId node_;
  SimTime processing_ms_;
  SimServices& services_;
  std::map<ElementId, domain::MedicalHistory> medical_;
  std::map<ElementId, std::vector<reasoning::DetectorConfig>> detectors_;
  rules::RuleSet ruleset_;
};

/// Shared simulation context handed to loop runtimes and services.
struct SimServices {
  netsim::Kernel& kernel;
  netsim::Topology& topology;
  netsim::Network& network;
  domain::Registry& registry;
  netsim::Metrics& metrics;
  netsim::EventLog& event_log;
  harness::RunReport& report;
  const SizeSchedule& sizes;
  SimTime duration_ms = 0;
  std::map<LoopId, NodeId> loop_nodes;    // where each loop runs
  std::map<PartyId, NodeId> party_nodes;  // notification endpoints
  // Streaming hook for the CLI --follow flag.
  std::function<void(const harness::NotificationRecord&)> on_notification;
};

}  // namespace careloop::control
