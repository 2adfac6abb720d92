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
#include <string>
#include <vector>

#include "careloop/context_mgmt.hpp"
#include "careloop/domain_model.hpp"
#include "careloop/reasoning.hpp"

namespace careloop::presentation {

/// The MVC model of one element's current status. The version counter moves
/// only on content changes; re-applying an identical situation is a no-op.
struct StatusModel {
  ElementId element;
  context::ContextSnapshot latest;
  std::vector<reasoning::Insight> active_insights;
  std::uint64_t version = 0;
};

/// Content equality behind version bumps: snapshot digest plus insights
/// compared without detected_at/evidence (a persisting condition re-detected
/// each cycle is the same status).
bool same_content(const StatusModel& model,
                  const std::vector<reasoning::Insight>& insights,
                  const context::ContextSnapshot& snap);

/// The reasoning engine is the controller: this is the only mutation entry
/// point for the model. Returns the input unchanged (version stable) when the
/// content is identical, otherwise a new model with version + 1.
StatusModel update_model(StatusModel model,
                         std::vector<reasoning::Insight> insights,
                         context::ContextSnapshot snap);

struct View {
  PartyId party;
  domain::DetailLevel detail = domain::DetailLevel::summary;
  std::string payload;
  std::uint64_t model_version = 0;
};

/// Renders the model for one party at its (possibly overridden) detail level:
/// full_clinical = vitals + insights + evidence, summary = insight kinds and
/// severities, alert_only = critical insights only (payload may be empty).
View render(const StatusModel& model, const domain::InterestedParty& party,
            std::optional<domain::DetailLevel> detail_override = std::nullopt);

struct Notification {
  PartyId party;
  ElementId element;
  View view;
  SimTime emitted_at = 0;
  std::uint64_t cause_version = 0;
};

/// Pull-renders one notification per observer for the model's current
/// version. Callers invoke this exactly once per version bump: one
/// Notification per (party, model version).
std::vector<Notification> notify_observers(
    const StatusModel& model,
    const std::vector<domain::InterestedParty>& observers,
    SimTime now,
    const std::map<PartyId, domain::DetailLevel>& detail_overrides = {});

}  // namespace careloop::presentation
