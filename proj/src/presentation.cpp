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

#include "careloop/presentation.hpp"

#include <algorithm>

namespace careloop::presentation {

namespace {

std::string insight_digest(const std::vector<reasoning::Insight>& insights) {
  std::vector<std::string> parts;
  parts.reserve(insights.size());
  for (const auto& ins : insights) {
    parts.push_back(ins.kind + "/" + std::string(to_string(ins.severity)) + "/" +
                    (ins.horizon.predicted ? "predicted" : "current") + "/" +
                    format_double(ins.confidence));
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto& p : parts) {
    out += p + ";";
  }
  return out;
}

std::string insight_line(const reasoning::Insight& ins) {
  std::string line = "insight: " + ins.kind + " " + std::string(to_string(ins.severity));
  if (ins.horizon.predicted) {
    line += " predicted+" + std::to_string(ins.horizon.lead_ms) + "ms";
  }
  return line;
}

}  // namespace

bool same_content(const StatusModel& model,
                  const std::vector<reasoning::Insight>& insights,
                  const context::ContextSnapshot& snap) {
  return model.latest.digest() == snap.digest() &&
         insight_digest(model.active_insights) == insight_digest(insights);
}

StatusModel update_model(StatusModel model,
                         std::vector<reasoning::Insight> insights,
                         context::ContextSnapshot snap) {
  if (model.version != 0 && same_content(model, insights, snap)) {
    return model;
  }
  if (model.version == 0 && model.element.empty()) {
    model.element = snap.element;
  }
  model.latest = std::move(snap);
  model.active_insights = std::move(insights);
  model.version += 1;
  return model;
}

View render(const StatusModel& model, const domain::InterestedParty& party,
            std::optional<domain::DetailLevel> detail_override) {
  const auto detail = detail_override.value_or(party.detail_level);
  View view;
  view.party = party.id;
  view.detail = detail;
  view.model_version = model.version;

  std::vector<std::string> lines;

  // Insight lines are the common core: alert_only keeps criticals, summary
  // keeps all, full_clinical adds vitals and evidence around them. Each level
  // renders a subset of the next richer one.
  for (const auto& ins : model.active_insights) {
    if (detail == domain::DetailLevel::alert_only && ins.severity != Severity::critical) {
      continue;
    }
    lines.push_back(insight_line(ins));
  }

  if (detail == domain::DetailLevel::full_clinical) {
    for (const auto& [name, mv] : model.latest.physiological) {
      lines.push_back("vital: " + name + "=" + format_double(mv.value));
    }
    for (const auto& [name, mv] : model.latest.environmental) {
      lines.push_back("env: " + name + "=" + format_double(mv.value));
    }
    lines.push_back("activity: " + std::string(to_string(model.latest.activity.state)) + "@" +
                    model.latest.activity.location);
    for (const auto& ins : model.active_insights) {
      std::string ev = "evidence: " + ins.kind + " [";
      for (std::size_t i = 0; i < ins.evidence.size(); ++i) {
        ev += (i ? "," : "") + std::to_string(ins.evidence[i]);
      }
      ev += "] " + ins.explanation;
      lines.push_back(ev);
    }
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    view.payload += lines[i];
    if (i + 1 < lines.size()) {
      view.payload += "\n";
    }
  }
  return view;
}

std::vector<Notification> notify_observers(
    const StatusModel& model,
    const std::vector<domain::InterestedParty>& observers,
    SimTime now,
    const std::map<PartyId, domain::DetailLevel>& detail_overrides) {
  std::vector<Notification> out;
  out.reserve(observers.size());
  for (const auto& party : observers) {
    std::optional<domain::DetailLevel> override_level;
    if (auto it = detail_overrides.find(party.id); it != detail_overrides.end()) {
      override_level = it->second;
    }
    Notification n;
    n.party = party.id;
    n.element = model.element;
    n.view = render(model, party, override_level);
    n.emitted_at = now;
    n.cause_version = model.version;
    out.push_back(std::move(n));
  }
  return out;
}

}  // namespace careloop::presentation
