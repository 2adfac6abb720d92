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

#include "careloop/simulation.hpp"

#include <algorithm>
#include <chrono>

namespace careloop::harness {

Simulation::Simulation(Scenario scenario)
    : scenario_(std::move(scenario)),
      network_(kernel_, topology_, metrics_, log_),
      services_{kernel_, topology_, network_,        registry_, metrics_, log_,
                report_, scenario_.sizes, scenario_.duration_ms, {},       {},       {}} {
  install_topology();
  install_registry();
  // Sensor polls are scheduled before loop heartbeats so that, at equal
  // timestamps, emissions (and their zero-latency deliveries) precede the
  // tick's drain stage.
  install_sensors();
  install_loops();
  install_dispatchers();
}

void Simulation::install_topology() {
  for (const auto& node : scenario_.nodes) {
    topology_.add_node(node);
  }
  for (const auto& link : scenario_.links) {
    topology_.add_link(link);
  }
}

void Simulation::install_registry() {
  for (const auto& element : scenario_.elements) {
    registry_.register_element(element);
  }
  for (const auto& sensor : scenario_.sensors) {
    registry_.register_sensor(sensor.desc);
  }
  for (const auto& [element, list] : scenario_.associations) {
    for (const auto& sensor : list) {
      registry_.associate(element, sensor);
    }
  }
  for (const auto& party : scenario_.parties) {
    services_.party_nodes[party.party.id] = party.node;
  }
  for (const auto& [element, list] : scenario_.interests) {
    for (const auto& party_id : list) {
      auto party_it = std::find_if(
          scenario_.parties.begin(), scenario_.parties.end(),
          [&](const ScenarioParty& p) { return p.party.id == party_id; });
      if (party_it == scenario_.parties.end()) {
        continue;  // validation rejects this; belt and braces
      }
      if (party_it->register_at_ms <= 0) {
        registry_.register_interest(party_it->party, element);
      } else {
        const auto party = party_it->party;
        const auto elem = element;
        kernel_.schedule(party_it->register_at_ms, [this, party, elem] {
          registry_.register_interest(party, elem);
          log_.record(kernel_.now(), "registry", "interest",
                      "party=" + party.id + " element=" + elem);
        });
      }
    }
  }
}

void Simulation::install_loops() {
  for (const auto& spec : scenario_.loops) {
    services_.loop_nodes[spec.id] = spec.placement;
  }
  for (const auto& spec : scenario_.loops) {
    auto runtime = std::make_unique<control::ControlLoopRuntime>(spec, services_);
    auto& kb = runtime->knowledge();
    kb.ruleset = rules::RuleSet(scenario_.rules);
    for (const auto& element : spec.scope) {
      kb.medical[element] = registry_.element(element).medical_history;
      kb.histories.emplace(element,
                           context::ContextHistory(element, scenario_.history_capacity));
      std::vector<reasoning::DetectorConfig> cfgs;
      for (const auto& det : scenario_.detectors) {
        if (det.element != element) {
          continue;
        }
        auto cfg = det.cfg;
        if (cfg.type == reasoning::DetectorType::fall && cfg.fall_max_gap_ms == 0) {
          cfg.fall_max_gap_ms = 2 * spec.cadence_ms;
        }
        cfgs.push_back(std::move(cfg));
      }
      kb.detectors[element] = cfgs;
    }
    if (spec.role != control::LoopRole::central) {
      for (const auto& element_id : spec.scope) {
        loop_of_element_.emplace(element_id, spec.id);
      }
    }
    if (spec.mode == control::LoopMode::apaas) {
      auto service = std::make_unique<control::ApaasService>(spec.id, spec.analysis_node,
                                                             spec.processing_ms, services_);
      for (const auto& element : spec.scope) {
        service->replicate(element, kb.medical.at(element), kb.detectors.at(element));
      }
      service->set_ruleset(kb.ruleset);
      apaas_[spec.id] = std::move(service);
    }
    loops_[spec.id] = std::move(runtime);
  }

  // Aggregation wiring per coordination mode.
  const auto& coord = scenario_.coordination;
  if (coord.mode == CoordinationMode::centralized && coord.epoch_ms > 0) {
    std::set<LoopId> reporters;
    for (const auto& spec : scenario_.loops) {
      if (spec.role == control::LoopRole::local && spec.region == coord.query.region) {
        reporters.insert(spec.id);
      }
    }
    const auto& central = loops_.at(coord.central_loop);
    central->configure_aggregation(coord.query, coord.epoch_ms, reporters, {});
    std::map<LoopId, NodeId> central_target{
        {coord.central_loop, services_.loop_nodes.at(coord.central_loop)}};
    for (const auto& id : reporters) {
      loops_.at(id)->configure_aggregation(coord.query, coord.epoch_ms, {}, central_target);
    }
  } else if (coord.mode == CoordinationMode::decentralized && coord.epoch_ms > 0) {
    std::set<LoopId> peers;
    std::map<LoopId, NodeId> peer_nodes;
    for (const auto& spec : scenario_.loops) {
      if (spec.role == control::LoopRole::peer && spec.region == coord.query.region) {
        peers.insert(spec.id);
        peer_nodes[spec.id] = spec.placement;
      }
    }
    for (const auto& id : peers) {
      loops_.at(id)->configure_aggregation(coord.query, coord.epoch_ms, peers, peer_nodes);
    }
  }

  for (auto& [_, runtime] : loops_) {
    runtime->install(scenario_.duration_ms);
  }
}

void Simulation::install_sensors() {
  for (const auto& sc : scenario_.sensors) {
    SensorRuntime rt;
    rt.state.id = sc.desc.id;
    rt.state.metric = sc.desc.metric_name;
    rt.category = sc.desc.category;
    rt.host = sc.desc.host_node;
    rt.script = sc.script;
    if (const auto* tb = std::get_if<sensing::TimeBased>(&sc.desc.mode)) {
      rt.time_based = true;
      rt.state.period_ms = tb->period_ms;
    } else {
      rt.time_based = false;
      rt.state.predicate = std::get<sensing::EventBased>(sc.desc.mode).predicate;
    }
    if (rt.script.has_value()) {
      // Activity scripts drive a step-interpolated code trace.
      rt.trace.metric = sc.desc.metric_name;
      rt.trace.interpolation = sensing::Interpolation::step;
      for (const auto& entry : rt.script->entries) {
        rt.trace.points.push_back({entry.t, sensing::activity_code(entry.state)});
      }
    } else {
      rt.trace = sc.trace;
    }
    const auto id = sc.desc.id;
    sensors_.emplace(id, std::move(rt));
    if (sensors_.at(id).time_based) {
      schedule_poll(id, 0, 0);
    } else {
      schedule_event_eval(id, 0);
    }
  }
}

void Simulation::schedule_poll(const SensorId& id, SimTime at, std::uint64_t generation) {
  kernel_.schedule(at, [this, id, generation] {
    auto& rt = sensors_.at(id);
    if (generation != rt.generation) {
      return;  // superseded by a sampling adjustment
    }
    const SimTime now = kernel_.now();
    schedule_poll(id, now + rt.state.period_ms, generation);
    if (auto reading = sensing::poll(rt.state, rt.trace, now)) {
      emit_reading(rt, std::move(*reading));
    }
  });
}

void Simulation::schedule_event_eval(const SensorId& id, SimTime at) {
  kernel_.schedule(at, [this, id] {
    auto& rt = sensors_.at(id);
    const SimTime now = kernel_.now();
    schedule_event_eval(id, now + scenario_.event_eval_tick_ms);
    const double value = sensing::sample_trace(rt.trace, now);
    if (auto reading = sensing::on_change(rt.state, now, value)) {
      emit_reading(rt, std::move(*reading));
    }
  });
}

void Simulation::emit_reading(SensorRuntime& rt, sensing::Reading reading) {
  // Element resolution happens at emission time via the association table.
  const auto element = registry_.element_of_sensor(rt.state.id);
  if (!element.has_value()) {
    log_.record(kernel_.now(), rt.host, "warn",
                "reading from unassociated sensor '" + rt.state.id + "' dropped");
    return;
  }
  reading.element = *element;
  rt.state.element = *element;

  if (rt.script.has_value()) {
    const auto& entry = rt.script->at(reading.timestamp);
    reading.activity =
        sensing::ActivityObservation{entry.state, entry.location, entry.t};
  }

  log_.record(reading.timestamp, rt.host, "reading",
              "sensor=" + reading.sensor + " metric=" + reading.metric + " value=" +
                  format_double(reading.value) + " seq=" + std::to_string(reading.seq) +
                  " element=" + reading.element);

  const auto loop_it = loop_of_element_.find(reading.element);
  if (loop_it == loop_of_element_.end()) {
    log_.record(kernel_.now(), rt.host, "warn",
                "no loop scopes element '" + reading.element + "'; reading dropped");
    return;
  }
  control::ReadingEnvelope envelope{loop_it->second, std::move(reading)};
  network_.send(rt.host, services_.loop_nodes.at(loop_it->second), control::kMsgRawReading,
                scenario_.sizes.of(control::kMsgRawReading), std::move(envelope));
}

void Simulation::apply_sampling_change(const control::CommandEnvelope& cmd,
                                       const NodeId& at_node) {
  auto it = sensors_.find(cmd.sensor);
  if (it == sensors_.end()) {
    log_.record(kernel_.now(), at_node, "warn", "command for unknown sensor '" + cmd.sensor + "'");
    return;
  }
  auto& rt = it->second;
  if (!rt.time_based) {
    log_.record(kernel_.now(), at_node, "warn",
                "sampling adjustment ignored for event-based sensor '" + cmd.sensor + "'");
    return;
  }
  if (cmd.new_period_ms <= 0) {
    log_.record(kernel_.now(), at_node, "warn",
                "sampling adjustment with non-positive period ignored");
    return;
  }
  if (cmd.new_period_ms == rt.state.period_ms) {
    return;
  }
  rt.state.period_ms = cmd.new_period_ms;
  ++rt.generation;
  log_.record(kernel_.now(), at_node, "sampling",
              "sensor=" + cmd.sensor + " period=" + std::to_string(cmd.new_period_ms));
  schedule_poll(cmd.sensor, kernel_.now() + cmd.new_period_ms, rt.generation);
}

void Simulation::dispatch(const netsim::Message& msg) {
  if (const auto* env = std::any_cast<control::ReadingEnvelope>(&msg.payload)) {
    if (auto it = loops_.find(env->target_loop); it != loops_.end()) {
      it->second->handle_message(msg);
    }
    return;
  }
  if (const auto* req = std::any_cast<control::SummaryRequest>(&msg.payload)) {
    if (auto it = apaas_.find(req->requester); it != apaas_.end()) {
      it->second->handle_request(*req);
    }
    return;
  }
  if (const auto* reply = std::any_cast<control::PlanReply>(&msg.payload)) {
    if (auto it = loops_.find(reply->requester); it != loops_.end()) {
      it->second->handle_message(msg);
    }
    return;
  }
  if (const auto* env = std::any_cast<control::InsightEnvelope>(&msg.payload)) {
    if (auto it = loops_.find(env->to_loop); it != loops_.end()) {
      it->second->handle_message(msg);
    }
    return;
  }
  if (const auto* env = std::any_cast<control::AggregateEnvelope>(&msg.payload)) {
    if (auto it = loops_.find(env->to); it != loops_.end()) {
      it->second->handle_message(msg);
    }
    return;
  }
  if (const auto* cmd = std::any_cast<control::CommandEnvelope>(&msg.payload)) {
    apply_sampling_change(*cmd, msg.dst);
    return;
  }
  // Notification envelopes terminate at application nodes; delivery is
  // already logged and accounted by the network.
}

void Simulation::install_dispatchers() {
  for (const auto& node : scenario_.nodes) {
    network_.register_handler(node.id, [this](const netsim::Message& msg) { dispatch(msg); });
  }
}

RunReport Simulation::run(std::function<void(const NotificationRecord&)> on_notification) {
  if (ran_) {
    throw Error(Errc::internal, "simulation instances run once");
  }
  ran_ = true;
  services_.on_notification = std::move(on_notification);

  const auto wall_start = std::chrono::steady_clock::now();
  kernel_.run_until(scenario_.duration_ms);
  const auto wall_end = std::chrono::steady_clock::now();

  report_.config_echo = scenario_.raw;
  report_.duration_ms = scenario_.duration_ms;
  report_.seed = scenario_.seed;
  report_.wall_clock_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(wall_end - wall_start).count();

  for (const auto& [layer, bytes] : metrics_.layer_ingress_bytes) {
    report_.layer_ingress_bytes[netsim::to_string(layer)] = bytes;
  }
  report_.bytes_by_kind = metrics_.bytes_by_kind;
  report_.link_hop_messages = metrics_.link_hop_messages;
  report_.remote_timeouts = metrics_.remote_timeouts;
  for (const auto& [loop, samples] : metrics_.decision_latency) {
    LatencyStats stats;
    stats.count = samples.size();
    for (const auto s : samples) {
      stats.sum_ms += s;
    }
    stats.min_ms = *std::min_element(samples.begin(), samples.end());
    stats.max_ms = *std::max_element(samples.begin(), samples.end());
    stats.mean_ms = static_cast<double>(stats.sum_ms) / static_cast<double>(stats.count);
    report_.latency[loop] = stats;
    report_.latency_samples[loop] = samples;
  }
  report_.messages_sent = metrics_.messages_sent;
  report_.messages_delivered = metrics_.messages_delivered;
  report_.in_flight_at_end = metrics_.messages_sent - metrics_.messages_delivered;
  metrics_.in_flight_at_end = report_.in_flight_at_end;

  if (scenario_.dump_histories) {
    nlohmann::ordered_json dump = nlohmann::ordered_json::object();
    for (const auto& [_, runtime] : loops_) {
      for (const auto& [element, chist] : runtime->knowledge().histories) {
        nlohmann::ordered_json series = nlohmann::ordered_json::array();
        for (const auto& snap : chist.snapshots()) {
          nlohmann::ordered_json entry;
          entry["t"] = snap.timestamp;
          for (const auto& [name, mv] : snap.physiological) {
            entry[name] = mv.value;
          }
          for (const auto& [name, mv] : snap.environmental) {
            entry[name] = mv.value;
          }
          entry["activity"] = to_string(snap.activity.state);
          series.push_back(std::move(entry));
        }
        dump[element] = std::move(series);
      }
    }
    report_.context_histories = std::move(dump);
  }

  report_.event_count = log_.lines().size();
  return report_;
}

std::vector<std::string> Simulation::verify_report(const Scenario& scenario,
                                                   const RunReport& report) {
  std::vector<std::string> problems;

  // Exactly-once: notifications per (party, element) must equal the version
  // bumps that happened while the party was registered.
  std::map<PartyId, SimTime> registered_at;
  for (const auto& party : scenario.parties) {
    registered_at[party.party.id] = party.register_at_ms;
  }
  for (const auto& [element, parties] : scenario.interests) {
    const auto bumps_it = report.version_bumps.find(element);
    const auto& bumps =
        bumps_it == report.version_bumps.end() ? std::vector<SimTime>{} : bumps_it->second;
    for (const auto& party : parties) {
      const SimTime reg = registered_at.count(party) ? registered_at.at(party) : 0;
      const auto expected = static_cast<std::uint64_t>(
          std::count_if(bumps.begin(), bumps.end(), [&](SimTime t) { return t >= reg; }));
      const auto actual = report.notification_count(party, element);
      if (expected != actual) {
        problems.push_back("notifications for (" + party + ", " + element + ") = " +
                           std::to_string(actual) + ", expected " + std::to_string(expected));
      }
    }
  }

  if (report.messages_delivered + report.in_flight_at_end != report.messages_sent) {
    problems.push_back("message conservation violated");
  }
  for (const auto& [loop, stats] : report.latency) {
    const auto it = report.latency_samples.find(loop);
    if (it == report.latency_samples.end() || it->second.size() != stats.count) {
      problems.push_back("latency sample count mismatch for loop '" + loop + "'");
    }
  }
  return problems;
}

RunResult run_scenario(const Scenario& scenario,
                       std::function<void(const NotificationRecord&)> on_notification) {
  Simulation sim(scenario);
  RunResult result;
  result.report = sim.run(std::move(on_notification));
  result.event_log = sim.event_log().joined();
  return result;
}

}  // namespace careloop::harness
