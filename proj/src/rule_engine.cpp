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

#include "careloop/rule_engine.hpp"

#include <algorithm>
#include <set>

namespace careloop::rules {

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::notify: return "notify";
    case ActionKind::adjust_sampling: return "adjust_sampling";
    case ActionKind::escalate: return "escalate";
    case ActionKind::log: return "log";
  }
  return "?";
}

std::string CorrectiveAction::describe() const {
  switch (kind) {
    case ActionKind::notify: {
      std::string target = notify_party.has_value() ? *notify_party
                           : notify_role.has_value() ? domain::to_string(*notify_role)
                                                     : "all";
      std::string out = "notify " + target;
      if (detail_override.has_value()) {
        out += " detail=" + std::string(domain::to_string(*detail_override));
      }
      return out;
    }
    case ActionKind::adjust_sampling:
      return "adjust_sampling " + sensor + " period=" + std::to_string(new_period_ms);
    case ActionKind::escalate:
      return "escalate to " + to_loop;
    case ActionKind::log:
      return "log \"" + text + "\"";
  }
  return "?";
}

const char* to_string(Comparator c) {
  switch (c) {
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
    case Comparator::gt: return ">";
    case Comparator::ge: return ">=";
    case Comparator::eq: return "==";
  }
  return "?";
}

bool parse_comparator(const std::string& text, Comparator& out) {
  if (text == "<") { out = Comparator::lt; return true; }
  if (text == "<=") { out = Comparator::le; return true; }
  if (text == ">") { out = Comparator::gt; return true; }
  if (text == ">=") { out = Comparator::ge; return true; }
  if (text == "==") { out = Comparator::eq; return true; }
  return false;
}

bool ContextGuard::matches(const context::ContextSnapshot& snap) const {
  const auto v = snap.metric(metric);
  if (!v.has_value()) {
    return false;
  }
  switch (op) {
    case Comparator::lt: return *v < value;
    case Comparator::le: return *v <= value;
    case Comparator::gt: return *v > value;
    case Comparator::ge: return *v >= value;
    case Comparator::eq: return *v == value;
  }
  return false;
}

bool kind_matches(const std::string& pattern, const std::string& kind) {
  if (!pattern.empty() && pattern.back() == '*') {
    return kind.compare(0, pattern.size() - 1, pattern, 0, pattern.size() - 1) == 0;
  }
  return pattern == kind;
}

RuleSet::RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
  std::set<std::string> ids;
  for (const auto& r : rules_) {
    if (!ids.insert(r.id).second) {
      throw Error(Errc::duplicate_rule_id, "rule '" + r.id + "'");
    }
    if (r.actions.empty()) {
      throw Error(Errc::invalid_field, "rule '" + r.id + "' has no actions");
    }
  }
}

RuleSet RuleSet::add(Rule rule) const {
  for (const auto& r : rules_) {
    if (r.id == rule.id) {
      throw Error(Errc::duplicate_rule_id, "rule '" + rule.id + "'");
    }
  }
  if (rule.actions.empty()) {
    throw Error(Errc::invalid_field, "rule '" + rule.id + "' has no actions");
  }
  std::vector<Rule> next = rules_;
  next.push_back(std::move(rule));
  RuleSet out;
  out.rules_ = std::move(next);
  return out;
}

RuleSet RuleSet::remove(const std::string& id) const {
  std::vector<Rule> next = rules_;
  auto it = std::find_if(next.begin(), next.end(), [&](const Rule& r) { return r.id == id; });
  if (it == next.end()) {
    throw Error(Errc::unknown_rule_id, "rule '" + id + "'");
  }
  next.erase(it);
  RuleSet out;
  out.rules_ = std::move(next);
  return out;
}

RuleSet RuleSet::set_enabled(const std::string& id, bool enabled) const {
  std::vector<Rule> next = rules_;
  auto it = std::find_if(next.begin(), next.end(), [&](const Rule& r) { return r.id == id; });
  if (it == next.end()) {
    throw Error(Errc::unknown_rule_id, "rule '" + id + "'");
  }
  it->enabled = enabled;
  RuleSet out;
  out.rules_ = std::move(next);
  return out;
}

std::vector<RuleFiring> evaluate_firings(const std::vector<reasoning::Insight>& insights,
                                         const context::ContextSnapshot& snap,
                                         const RuleSet& rules) {
  std::vector<const Rule*> order;
  order.reserve(rules.rules().size());
  for (const auto& r : rules.rules()) {
    if (r.enabled) {
      order.push_back(&r);
    }
  }
  std::sort(order.begin(), order.end(), [](const Rule* a, const Rule* b) {
    if (a->priority != b->priority) {
      return a->priority > b->priority;
    }
    return a->id < b->id;
  });

  std::vector<RuleFiring> firings;
  for (const Rule* r : order) {
    RuleFiring f;
    f.rule_id = r->id;
    for (const auto& ins : insights) {
      if (!kind_matches(r->condition.kind_pattern, ins.kind)) {
        continue;
      }
      if (ins.severity < r->condition.min_severity) {
        continue;
      }
      if (r->condition.guard.has_value() && !r->condition.guard->matches(snap)) {
        continue;
      }
      f.matched_insight_keys.push_back(ins.key());
    }
    if (!f.matched_insight_keys.empty()) {
      f.actions = r->actions;
      firings.push_back(std::move(f));
    }
  }
  return firings;
}

std::vector<CorrectiveAction> evaluate(const std::vector<reasoning::Insight>& insights,
                                       const context::ContextSnapshot& snap,
                                       const RuleSet& rules) {
  std::vector<CorrectiveAction> out;
  for (const auto& firing : evaluate_firings(insights, snap, rules)) {
    for (const auto& action : firing.actions) {
      if (std::find(out.begin(), out.end(), action) == out.end()) {
        out.push_back(action);
      }
    }
  }
  return out;
}

}  // namespace careloop::rules
