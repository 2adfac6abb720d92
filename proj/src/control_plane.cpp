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

#include "careloop/control_plane.hpp"

#include <algorithm>

namespace careloop::control {

const char* to_string(LoopMode m) {
  return m == LoopMode::mape ? "mape" : "apaas";
}

const char* to_string(LoopRole r) {
  switch (r) {
    case LoopRole::local: return "local";
    case LoopRole::central: return "central";
    case LoopRole::peer: return "peer";
  }
  return "?";
}

bool parse_loop_mode(const std::string& text, LoopMode& out) {
  if (text == "mape") { out = LoopMode::mape; return true; }
  if (text == "apaas") { out = LoopMode::apaas; return true; }
  return false;
}

bool parse_loop_role(const std::string& text, LoopRole& out) {
  if (text == "local") { out = LoopRole::local; return true; }
  if (text == "central") { out = LoopRole::central; return true; }
  if (text == "peer") { out = LoopRole::peer; return true; }
  return false;
}

std::uint64_t SizeSchedule::of(const std::string& kind) const {
  auto it = sizes.find(kind);
  if (it == sizes.end()) {
    throw Error(Errc::internal, "no size scheduled for message kind '" + kind + "'");
  }
  return it->second;
}

SizeSchedule SizeSchedule::defaults() {
  SizeSchedule s;
  s.sizes = {{kMsgRawReading, 64},   {kMsgContextSummary, 256}, {kMsgPlanReply, 128},
             {kMsgInsight, 128},     {kMsgNotification, 96},    {kMsgCommand, 32},
             {kMsgAggregateReport, 64}};
  return s;
}

AggregationOutcome central_aggregate(const AggregateQuery& query, std::uint64_t epoch,
                                     const std::set<LoopId>& expected,
                                     const std::map<LoopId, AggregateReport>& received,
                                     const LoopId& computed_by, SimTime computed_at) {
  AggregationOutcome out;
  out.result.epoch = epoch;
  out.result.kind = query.kind;
  out.result.region = query.region;
  out.result.computed_by = computed_by;
  out.result.computed_at = computed_at;
  for (const auto& loop : expected) {
    auto it = received.find(loop);
    if (it == received.end()) {
      out.missing.push_back(loop);  // counted as zero-affected
      continue;
    }
    out.result.affected += it->second.affected;
    out.result.total += it->second.total;
  }
  out.result.percentage =
      out.result.total == 0
          ? 0.0
          : 100.0 * static_cast<double>(out.result.affected) / static_cast<double>(out.result.total);
  return out;
}

std::map<LoopId, harness::AggregateRecord> peer_exchange(
    const AggregateQuery& query, std::uint64_t epoch,
    const std::map<LoopId, AggregateReport>& reports, SimTime computed_at) {
  std::set<LoopId> everyone;
  for (const auto& [id, _] : reports) {
    everyone.insert(id);
  }
  std::map<LoopId, harness::AggregateRecord> out;
  for (const auto& peer : everyone) {
    out[peer] = central_aggregate(query, epoch, everyone, reports, peer, computed_at).result;
  }
  return out;
}

// ---------------------------------------------------------------------------

ControlLoopRuntime::ControlLoopRuntime(ControlLoopSpec spec, SimServices& services)
    : spec_(std::move(spec)), services_(services) {}

void ControlLoopRuntime::log(const std::string& kind, const std::string& details) const {
  services_.event_log.record(services_.kernel.now(), spec_.placement, kind,
                             "loop=" + spec_.id + " " + details);
}

void ControlLoopRuntime::install(SimTime horizon) {
  if (spec_.role != LoopRole::central) {
    services_.kernel.schedule(spec_.phase_ms, [this, horizon] { heartbeat(horizon); });
  }
  if (agg_query_.has_value() && epoch_ms_ > 0 && spec_.role != LoopRole::central) {
    for (SimTime t = epoch_ms_; t <= horizon; t += epoch_ms_) {
      const auto epoch = static_cast<std::uint64_t>(t / epoch_ms_);
      services_.kernel.schedule(t, [this, epoch] { epoch_tick(epoch); });
    }
  }
}

void ControlLoopRuntime::configure_aggregation(const AggregateQuery& query, SimTime epoch_ms,
                                               std::set<LoopId> expected_reporters,
                                               std::map<LoopId, NodeId> reporter_nodes) {
  agg_query_ = query;
  epoch_ms_ = epoch_ms;
  expected_reporters_ = std::move(expected_reporters);
  reporter_nodes_ = std::move(reporter_nodes);
}

AggregateReport ControlLoopRuntime::local_aggregate_counts(std::uint64_t epoch) const {
  AggregateReport report;
  report.from = spec_.id;
  report.epoch = epoch;
  report.total = spec_.scope.size();
  if (!agg_query_.has_value()) {
    return report;
  }
  const std::string needle = "|" + agg_query_->kind + "|";
  for (const auto& element : spec_.scope) {
    auto it = kb_.active_keys.find(element);
    if (it == kb_.active_keys.end()) {
      continue;
    }
    const bool affected = std::any_of(it->second.begin(), it->second.end(),
                                      [&](const std::string& key) {
                                        return key.find(needle) != std::string::npos;
                                      });
    if (affected) {
      ++report.affected;
    }
  }
  return report;
}

void ControlLoopRuntime::heartbeat(SimTime horizon) {
  const SimTime now = services_.kernel.now();

  // An APaaS reply that missed the cadence window degrades that iteration to
  // an empty plan; the next tick starts over with fresh data.
  if (!awaiting_replies_.empty()) {
    for (const auto& element : awaiting_replies_) {
      log("degraded", "element=" + element + " iteration=" + std::to_string(pending_iteration_) +
                          " reason=RemoteTimeout");
      services_.metrics.remote_timeouts[spec_.id] += 1;
    }
    awaiting_replies_.clear();
    pending_emissions_.clear();
  }

  // Two-stage tick: the work event is inserted now, so message deliveries
  // already queued for this timestamp run before the drain.
  services_.kernel.schedule(now, [this] { run_iteration(services_.kernel.now()); });
  if (now + spec_.cadence_ms <= horizon) {
    services_.kernel.schedule(now + spec_.cadence_ms, [this, horizon] { heartbeat(horizon); });
  }
}

void ControlLoopRuntime::run_iteration(SimTime now) {
  ++iteration_;
  services_.report.iterations[spec_.id] += 1;

  // Monitor: drain the inbox into per-element buckets.
  std::vector<sensing::Reading> drained;
  drained.swap(inbox_);
  std::map<ElementId, std::vector<sensing::Reading>> buckets;
  for (auto& r : drained) {
    if (spec_.scope.count(r.element) == 0) {
      log("warn", "reading for out-of-scope element '" + r.element + "' dropped");
      continue;
    }
    buckets[r.element].push_back(std::move(r));
  }
  log("iteration",
      "n=" + std::to_string(iteration_) + " readings=" + std::to_string(drained.size()));

  for (const auto& element : spec_.scope) {
    auto& chist = kb_.histories.at(element);
    const auto bucket_it = buckets.find(element);
    static const std::vector<sensing::Reading> kNone;
    const auto& fresh = bucket_it == buckets.end() ? kNone : bucket_it->second;

    std::map<std::string, SimTime> earliest;
    for (const auto& r : fresh) {
      const std::string key = r.activity.has_value() ? "__activity__" : r.metric;
      auto [it, inserted] = earliest.emplace(key, r.timestamp);
      if (!inserted && r.timestamp < it->second) {
        it->second = r.timestamp;
      }
    }

    context::MetricCategories categories;
    for (const auto& sensor : services_.registry.sensors_of(element)) {
      const auto& desc = services_.registry.sensor(sensor);
      categories[desc.metric_name] = desc.category;
    }

    const context::ContextSnapshot* prev = chist.empty() ? nullptr : &chist.latest();
    auto snap = context::assemble_context(element, fresh, prev, now, categories);
    chist.append(std::move(snap));

    // Bounded analysis window shared by both placements, so an offloaded loop
    // reasons over exactly what a local one would.
    SimTime max_window = 2;
    for (const auto& cfg : kb_.detectors[element]) {
      max_window = std::max<SimTime>(max_window, cfg.window_size);
    }
    const auto win_size = static_cast<std::size_t>(std::max<SimTime>(8, 2 * max_window));
    auto window = chist.window(win_size);

    if (spec_.mode == LoopMode::mape) {
      context::ContextHistory view(element, window.size());
      for (auto& s : window) {
        view.append(std::move(s));
      }
      auto outcome = reasoning::reason(kb_.medical.at(element), view, kb_.detectors[element]);
      for (const auto& d : outcome.diagnostics) {
        services_.report.diagnostics.push_back(spec_.id + "/" + element + ": " + d);
        log("diagnostic", "element=" + element + " " + d);
      }
      auto firings = rules::evaluate_firings(outcome.insights, chist.latest(), kb_.ruleset);
      services_.kernel.schedule(
          now + spec_.processing_ms,
          [this, element, insights = std::move(outcome.insights),
           firings = std::move(firings), earliest = std::move(earliest)] {
            execute(element, insights, firings, services_.kernel.now(), earliest);
          });
    } else {
      SummaryRequest request;
      request.requester = spec_.id;
      request.reply_to = spec_.placement;
      request.element = element;
      request.iteration = iteration_;
      request.window = std::move(window);
      pending_iteration_ = iteration_;
      awaiting_replies_.insert(element);
      pending_emissions_[element] = std::move(earliest);
      services_.network.send(spec_.placement, spec_.analysis_node, kMsgContextSummary,
                             services_.sizes.of(kMsgContextSummary), std::move(request));
    }
  }
}

std::vector<domain::InterestedParty> ControlLoopRuntime::observers_of(
    const ElementId& element) const {
  std::vector<domain::InterestedParty> out;
  for (const auto& party : services_.registry.observers(element)) {
    out.push_back(services_.registry.party(party));
  }
  return out;
}

void ControlLoopRuntime::execute(const ElementId& element,
                                 const std::vector<reasoning::Insight>& insights,
                                 const std::vector<rules::RuleFiring>& firings, SimTime now,
                                 const std::map<std::string, SimTime>& earliest_emission) {
  // Record the Analyze outcome. tick/detected_at are monitor-phase times, so
  // the record is identical whether analysis ran at the fog or the cloud.
  for (const auto& ins : insights) {
    harness::InsightRecord rec;
    rec.tick = ins.detected_at;
    rec.loop = spec_.id;
    rec.element = ins.element;
    rec.kind = ins.kind;
    rec.severity = to_string(ins.severity);
    rec.predicted = ins.horizon.predicted;
    rec.lead_ms = ins.horizon.lead_ms;
    rec.confidence = ins.confidence;
    rec.detected_at = ins.detected_at;
    rec.evidence = ins.evidence;
    rec.explanation = ins.explanation;
    services_.report.insights.push_back(std::move(rec));
    log("insight", "element=" + ins.element + " kind=" + ins.kind +
                       " severity=" + std::string(to_string(ins.severity)) + " horizon=" +
                       (ins.horizon.predicted ? "predicted" : "current") +
                       " confidence=" + format_double(ins.confidence));
  }

  // Flatten firings in order with exact-duplicate actions removed.
  struct Executed {
    const rules::CorrectiveAction* action;
    const rules::RuleFiring* firing;
  };
  std::vector<Executed> executed;
  for (const auto& firing : firings) {
    for (const auto& action : firing.actions) {
      const bool dup = std::any_of(executed.begin(), executed.end(), [&](const Executed& e) {
        return *e.action == action;
      });
      if (!dup) {
        executed.push_back(Executed{&action, &firing});
      }
    }
  }

  // Onset set: which insight keys became active this iteration.
  auto& active = kb_.active_keys[element];
  std::set<std::string> current_keys;
  std::set<std::string> onsets;
  for (const auto& ins : insights) {
    current_keys.insert(ins.key());
    if (active.count(ins.key()) == 0) {
      onsets.insert(ins.key());
    }
  }

  // Update the status model; the reasoning outcome is the controller.
  auto& model = kb_.models[element];
  const std::uint64_t version_before = model.version;
  model = presentation::update_model(std::move(model), insights, kb_.histories.at(element).latest());
  const bool bumped = model.version > version_before;

  // Latency attribution: first action capable of realizing each insight.
  auto matched = [](const rules::RuleFiring& f, const std::string& key) {
    return std::find(f.matched_insight_keys.begin(), f.matched_insight_keys.end(), key) !=
           f.matched_insight_keys.end();
  };
  auto can_realize = [&](const Executed& e, const reasoning::Insight& ins) {
    switch (e.action->kind) {
      case rules::ActionKind::notify: return bumped;
      case rules::ActionKind::adjust_sampling: return true;
      case rules::ActionKind::escalate: return onsets.count(ins.key()) != 0;
      case rules::ActionKind::log: return true;
    }
    return false;
  };
  // executed index -> insights whose latency sample rides on it
  std::map<std::size_t, std::vector<const reasoning::Insight*>> attribution;
  for (const auto& ins : insights) {
    if (ins.source_metric.empty() || earliest_emission.count(ins.source_metric) == 0) {
      continue;  // carried-forward data only; no fresh reading to measure from
    }
    for (std::size_t i = 0; i < executed.size(); ++i) {
      if (matched(*executed[i].firing, ins.key()) && can_realize(executed[i], ins)) {
        attribution[i].push_back(&ins);
        break;
      }
    }
  }
  auto tags_for = [&](std::size_t index) {
    std::vector<netsim::LatencyTag> tags;
    if (auto it = attribution.find(index); it != attribution.end()) {
      for (const auto* ins : it->second) {
        tags.push_back(netsim::LatencyTag{spec_.id, earliest_emission.at(ins->source_metric)});
      }
    }
    return tags;
  };

  // Collect notify detail overrides before rendering.
  std::map<PartyId, domain::DetailLevel> overrides;
  for (const auto& e : executed) {
    if (e.action->kind != rules::ActionKind::notify || !e.action->detail_override.has_value()) {
      continue;
    }
    if (e.action->notify_party.has_value()) {
      overrides[*e.action->notify_party] = *e.action->detail_override;
    } else if (e.action->notify_role.has_value()) {
      for (const auto& party : observers_of(element)) {
        if (party.role == *e.action->notify_role) {
          overrides[party.id] = *e.action->detail_override;
        }
      }
    }
  }

  // Observer delivery: exactly one notification per registered party per
  // version bump, regardless of which rules fired.
  std::vector<presentation::Notification> notifications;
  if (bumped && model.version > kb_.last_notified_version[element]) {
    notifications = presentation::notify_observers(model, observers_of(element), now, overrides);
    kb_.last_notified_version[element] = model.version;
    services_.report.version_bumps[element].push_back(now);
  }

  std::size_t actions_dispatched = 0;
  for (std::size_t i = 0; i < executed.size(); ++i) {
    const auto& action = *executed[i].action;
    auto tags = tags_for(i);

    harness::ActionRecord rec;
    rec.tick = kb_.histories.at(element).latest().timestamp;
    rec.loop = spec_.id;
    rec.rule = executed[i].firing->rule_id;
    rec.element = element;
    rec.description = action.describe();

    switch (action.kind) {
      case rules::ActionKind::notify:
        // Delivery happens in the notification round below; the action
        // contributed overrides (already gathered) and latency attribution.
        if (!tags.empty() && !notifications.empty()) {
          pending_notification_tags_.insert(pending_notification_tags_.end(), tags.begin(),
                                            tags.end());
        }
        break;
      case rules::ActionKind::adjust_sampling: {
        const auto& desc = services_.registry.sensor(action.sensor);
        CommandEnvelope cmd{action.sensor, action.new_period_ms};
        services_.network.send(spec_.placement, desc.host_node, kMsgCommand,
                               services_.sizes.of(kMsgCommand), cmd, std::move(tags));
        break;
      }
      case rules::ActionKind::escalate: {
        auto node_it = services_.loop_nodes.find(action.to_loop);
        if (node_it == services_.loop_nodes.end()) {
          log("warn", "escalate target '" + action.to_loop + "' unknown");
          break;
        }
        for (const auto& ins : insights) {
          if (!matched(*executed[i].firing, ins.key()) || onsets.count(ins.key()) == 0) {
            continue;
          }
          std::vector<netsim::LatencyTag> envelope_tags;
          if (auto em = earliest_emission.find(ins.source_metric); em != earliest_emission.end()) {
            for (const auto& t : tags) {
              if (t.reading_emitted_at == em->second) {
                envelope_tags.push_back(t);
                break;
              }
            }
          }
          InsightEnvelope env{spec_.id, action.to_loop, ins};
          services_.network.send(spec_.placement, node_it->second, kMsgInsight,
                                 services_.sizes.of(kMsgInsight), env, std::move(envelope_tags));
          log("escalate", "element=" + element + " kind=" + ins.kind + " to=" + action.to_loop);
        }
        break;
      }
      case rules::ActionKind::log:
        log("action_log", "element=" + element + " text=" + action.text);
        for (const auto& t : tags) {
          services_.metrics.record_latency(spec_.id, now - t.reading_emitted_at);
        }
        break;
    }

    services_.report.actions.push_back(std::move(rec));
    ++actions_dispatched;
  }

  // Send the notification round; the first message carries any pending tags.
  for (std::size_t n = 0; n < notifications.size(); ++n) {
    const auto& notification = notifications[n];
    harness::NotificationRecord rec;
    rec.party = notification.party;
    rec.element = notification.element;
    rec.version = notification.cause_version;
    rec.emitted_at = notification.emitted_at;
    rec.detail = domain::to_string(notification.view.detail);
    rec.payload = notification.view.payload;
    services_.report.notifications.push_back(rec);
    if (services_.on_notification) {
      services_.on_notification(rec);
    }
    log("notify", "party=" + notification.party + " element=" + notification.element +
                      " version=" + std::to_string(notification.cause_version) +
                      " detail=" + rec.detail);

    auto node_it = services_.party_nodes.find(notification.party);
    if (node_it != services_.party_nodes.end()) {
      NotificationEnvelope env{notification.party, notification.element,
                               notification.cause_version};
      std::vector<netsim::LatencyTag> tags;
      if (n == 0) {
        tags.swap(pending_notification_tags_);
      }
      services_.network.send(spec_.placement, node_it->second, kMsgNotification,
                             services_.sizes.of(kMsgNotification), env, std::move(tags));
    }
  }
  pending_notification_tags_.clear();

  active = std::move(current_keys);
  log("execute", "element=" + element + " tick=" +
                     std::to_string(kb_.histories.at(element).latest().timestamp) +
                     " insights=" + std::to_string(insights.size()) +
                     " actions=" + std::to_string(actions_dispatched) +
                     " version=" + std::to_string(model.version) +
                     (bumped ? " bumped=1" : " bumped=0"));
}

void ControlLoopRuntime::epoch_tick(std::uint64_t epoch) {
  if (!agg_query_.has_value() || spec_.region != agg_query_->region) {
    return;
  }
  const auto counts = local_aggregate_counts(epoch);
  log("aggregate_report", "epoch=" + std::to_string(epoch) + " affected=" +
                              std::to_string(counts.affected) + " total=" +
                              std::to_string(counts.total));
  if (spec_.role == LoopRole::peer) {
    // Full-mesh broadcast; our own counts are folded in directly.
    epoch_reports_[epoch][spec_.id] = counts;
    for (const auto& [peer, node] : reporter_nodes_) {
      if (peer == spec_.id) {
        continue;
      }
      AggregateEnvelope env{peer, counts};
      services_.network.send(spec_.placement, node, kMsgAggregateReport,
                             services_.sizes.of(kMsgAggregateReport), env);
    }
    maybe_finish_epoch(epoch);
  } else {
    // Master-slave: report to the central loop.
    for (const auto& [central, node] : reporter_nodes_) {
      AggregateEnvelope env{central, counts};
      services_.network.send(spec_.placement, node, kMsgAggregateReport,
                             services_.sizes.of(kMsgAggregateReport), env);
    }
  }
}

void ControlLoopRuntime::handle_aggregate(const AggregateEnvelope& env, SimTime now) {
  if (!agg_query_.has_value()) {
    return;
  }
  const auto epoch = env.report.epoch;
  if (epochs_done_.count(epoch) != 0) {
    return;
  }
  epoch_reports_[epoch][env.report.from] = env.report;
  // Deadline fallback one epoch later covers reporters that never arrive.
  if (epoch_reports_[epoch].size() == 1 && epoch_ms_ > 0) {
    const SimTime deadline = std::max<SimTime>(now, static_cast<SimTime>(epoch) * epoch_ms_ + epoch_ms_);
    services_.kernel.schedule(deadline, [this, epoch] {
      if (epochs_done_.count(epoch) == 0 && !epoch_reports_[epoch].empty()) {
        finish_epoch(epoch, services_.kernel.now());
      }
    });
  }
  maybe_finish_epoch(epoch);
}

void ControlLoopRuntime::maybe_finish_epoch(std::uint64_t epoch) {
  if (epochs_done_.count(epoch) != 0) {
    return;
  }
  const auto it = epoch_reports_.find(epoch);
  if (it == epoch_reports_.end()) {
    return;
  }
  for (const auto& expected : expected_reporters_) {
    if (it->second.count(expected) == 0) {
      return;  // still waiting; deadline may force completion later
    }
  }
  finish_epoch(epoch, services_.kernel.now());
}

void ControlLoopRuntime::finish_epoch(std::uint64_t epoch, SimTime now) {
  epochs_done_.insert(epoch);
  auto outcome = central_aggregate(*agg_query_, epoch, expected_reporters_,
                                   epoch_reports_[epoch], spec_.id, now);
  for (const auto& gap : outcome.missing) {
    log("aggregate_gap", "epoch=" + std::to_string(epoch) + " missing=" + gap);
  }
  services_.report.aggregates.push_back(outcome.result);
  log("aggregate", "epoch=" + std::to_string(epoch) + " kind=" + outcome.result.kind +
                       " affected=" + std::to_string(outcome.result.affected) + " total=" +
                       std::to_string(outcome.result.total) + " percentage=" +
                       format_double(outcome.result.percentage));
  epoch_reports_.erase(epoch);
}

void ControlLoopRuntime::handle_message(const netsim::Message& msg) {
  if (const auto* env = std::any_cast<ReadingEnvelope>(&msg.payload)) {
    inbox_.push_back(env->reading);
    return;
  }
  if (const auto* reply = std::any_cast<PlanReply>(&msg.payload)) {
    if (reply->iteration != pending_iteration_ || awaiting_replies_.count(reply->element) == 0) {
      log("stale_reply", "element=" + reply->element + " iteration=" +
                             std::to_string(reply->iteration));
      return;
    }
    awaiting_replies_.erase(reply->element);
    for (const auto& d : reply->diagnostics) {
      services_.report.diagnostics.push_back(spec_.id + "/" + reply->element + ": " + d);
      log("diagnostic", "element=" + reply->element + " " + d);
    }
    auto emissions = std::move(pending_emissions_[reply->element]);
    pending_emissions_.erase(reply->element);
    execute(reply->element, reply->insights, reply->firings, services_.kernel.now(), emissions);
    return;
  }
  if (const auto* env = std::any_cast<InsightEnvelope>(&msg.payload)) {
    services_.report.escalations_received[spec_.id] += 1;
    log("escalation_received", "from=" + env->from + " element=" + env->insight.element +
                                   " kind=" + env->insight.kind);
    return;
  }
  if (const auto* env = std::any_cast<AggregateEnvelope>(&msg.payload)) {
    handle_aggregate(*env, services_.kernel.now());
    return;
  }
  log("warn", "unhandled message kind=" + msg.kind);
}

// ---------------------------------------------------------------------------

ApaasService::ApaasService(LoopId for_loop, NodeId node, SimTime processing_ms,
                           SimServices& services)
    : for_loop_(std::move(for_loop)),
      node_(std::move(node)),
      processing_ms_(processing_ms),
      services_(services) {}

void ApaasService::replicate(const ElementId& element, domain::MedicalHistory medical,
                             std::vector<reasoning::DetectorConfig> detectors) {
  medical_[element] = std::move(medical);
  detectors_[element] = std::move(detectors);
}

void ApaasService::set_ruleset(rules::RuleSet ruleset) {
  ruleset_ = std::move(ruleset);
}

void ApaasService::handle_request(const SummaryRequest& request) {
  PlanReply reply;
  reply.requester = request.requester;
  reply.element = request.element;
  reply.iteration = request.iteration;

  if (!request.window.empty()) {
    context::ContextHistory view(request.element, request.window.size());
    for (const auto& snap : request.window) {
      view.append(snap);
    }
    static const domain::MedicalHistory kEmptyHistory;
    const auto med_it = medical_.find(request.element);
    const auto& medical = med_it == medical_.end() ? kEmptyHistory : med_it->second;
    static const std::vector<reasoning::DetectorConfig> kNoDetectors;
    const auto cfg_it = detectors_.find(request.element);
    const auto& cfgs = cfg_it == detectors_.end() ? kNoDetectors : cfg_it->second;

    auto outcome = reasoning::reason(medical, view, cfgs);
    reply.insights = std::move(outcome.insights);
    reply.diagnostics = std::move(outcome.diagnostics);
    reply.firings = rules::evaluate_firings(reply.insights, request.window.back(), ruleset_);
  }

  // Analyze + Plan cost is paid here; the reply leaves processing_ms later.
  const auto reply_to = request.reply_to;
  services_.kernel.schedule(services_.kernel.now() + processing_ms_,
                            [this, reply = std::move(reply), reply_to]() mutable {
                              services_.network.send(node_, reply_to, kMsgPlanReply,
                                                     services_.sizes.of(kMsgPlanReply),
                                                     std::move(reply));
                            });
}

}  // namespace careloop::control
