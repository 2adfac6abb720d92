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

#include <optional>
#include <string>
#include <vector>

#include "careloop/domain_model.hpp"
#include "careloop/reasoning.hpp"
#include "careloop/types.hpp"

namespace careloop::rules {

enum class ActionKind { notify, adjust_sampling, escalate, log };

const char* to_string(ActionKind k);

/// One planned response. Which parameter group applies depends on kind.
struct CorrectiveAction {
  ActionKind kind = ActionKind::log;

  // notify: either a role (all registered parties with it) or one party.
  std::optional<domain::PartyRole> notify_role;
  std::optional<PartyId> notify_party;
  std::optional<domain::DetailLevel> detail_override;

  // adjust_sampling
  SensorId sensor;
  SimTime new_period_ms = 0;  // > 0

  // escalate
  LoopId to_loop;

  // log
  std::string text;

  bool operator==(const CorrectiveAction&) const = default;

  std::string describe() const;
};

enum class Comparator { lt, le, gt, ge, eq };

const char* to_string(Comparator c);
bool parse_comparator(const std::string& text, Comparator& out);

/// Optional context condition: the rule fires only when the snapshot carries
/// the metric and the comparison holds.
struct ContextGuard {
  std::string metric;
  Comparator op = Comparator::gt;
  double value = 0.0;

  bool matches(const context::ContextSnapshot& snap) const;
};

/// Matches insight kinds exactly, or by prefix when the pattern ends in '*'.
bool kind_matches(const std::string& pattern, const std::string& kind);

struct RuleCondition {
  std::string kind_pattern = "*";
  Severity min_severity = Severity::info;
  std::optional<ContextGuard> guard;
};

struct Rule {
  std::string id;
  int priority = 0;  // higher fires earlier
  bool enabled = true;
  RuleCondition condition;
  std::vector<CorrectiveAction> actions;  // non-empty
};

/// Immutable rule collection; updates return a new value. Storage order never
/// affects evaluation: firing order is (priority desc, id asc).
class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<Rule> rules);  // throws DuplicateRuleId

  RuleSet add(Rule rule) const;
  RuleSet remove(const std::string& id) const;
  RuleSet set_enabled(const std::string& id, bool enabled) const;

  const std::vector<Rule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }

 private:
  std::vector<Rule> rules_;
};

/// One rule that fired: which insights matched it and what it wants done.
struct RuleFiring {
  std::string rule_id;
  std::vector<std::string> matched_insight_keys;
  std::vector<CorrectiveAction> actions;
};

/// All enabled rules whose condition matches any insight fire, ordered by
/// (priority desc, id asc).
std::vector<RuleFiring> evaluate_firings(const std::vector<reasoning::Insight>& insights,
                                         const context::ContextSnapshot& snap,
                                         const RuleSet& rules);

/// Concatenated actions in firing order with exact duplicates removed,
/// keeping the first occurrence.
std::vector<CorrectiveAction> evaluate(const std::vector<reasoning::Insight>& insights,
                                       const context::ContextSnapshot& snap,
                                       const RuleSet& rules);

}  // namespace careloop::rules
