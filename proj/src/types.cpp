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

#include "careloop/types.hpp"

#include <charconv>

#include "careloop/errors.hpp"

namespace careloop {

const char* to_string(Direction d) {
  return d == Direction::above ? "above" : "below";
}

const char* to_string(Severity s) {
  switch (s) {
    case Severity::info: return "info";
    case Severity::warning: return "warning";
    case Severity::critical: return "critical";
  }
  return "?";
}

const char* to_string(ActivityState s) {
  switch (s) {
    case ActivityState::unknown: return "unknown";
    case ActivityState::moving: return "moving";
    case ActivityState::laying_in_bed: return "laying_in_bed";
    case ActivityState::sitting: return "sitting";
    case ActivityState::standing: return "standing";
  }
  return "?";
}

bool parse_direction(const std::string& text, Direction& out) {
  if (text == "above") { out = Direction::above; return true; }
  if (text == "below") { out = Direction::below; return true; }
  return false;
}

bool parse_severity(const std::string& text, Severity& out) {
  if (text == "info") { out = Severity::info; return true; }
  if (text == "warning") { out = Severity::warning; return true; }
  if (text == "critical") { out = Severity::critical; return true; }
  return false;
}

bool parse_activity_state(const std::string& text, ActivityState& out) {
  if (text == "unknown") { out = ActivityState::unknown; return true; }
  if (text == "moving") { out = ActivityState::moving; return true; }
  if (text == "laying_in_bed") { out = ActivityState::laying_in_bed; return true; }
  if (text == "sitting") { out = ActivityState::sitting; return true; }
  if (text == "standing") { out = ActivityState::standing; return true; }
  return false;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const char* to_string(Errc c) {
  switch (c) {
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::invalid_field: return "InvalidField";
    case Errc::not_found: return "NotFound";
    case Errc::duplicate_baseline: return "DuplicateBaseline";
    case Errc::invalid_period: return "InvalidPeriod";
    case Errc::already_associated: return "AlreadyAssociated";
    case Errc::duplicate_interest: return "DuplicateInterest";
    case Errc::before_trace_start: return "BeforeTraceStart";
    case Errc::non_monotone_timestamp: return "NonMonotoneTimestamp";
    case Errc::insufficient_window: return "InsufficientWindow";
    case Errc::degenerate_fit: return "DegenerateFit";
    case Errc::duplicate_rule_id: return "DuplicateRuleId";
    case Errc::unknown_rule_id: return "UnknownRuleId";
    case Errc::time_travel: return "TimeTravel";
    case Errc::no_route: return "NoRoute";
    case Errc::parse_error: return "ParseError";
    case Errc::validation_error: return "ValidationError";
    case Errc::unknown_format: return "UnknownFormat";
    case Errc::internal: return "Internal";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {
std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = std::to_string(problems.size()) + " problem(s)";
  for (const auto& p : problems) {
    out += "\n  - " + p;
  }
  return out;
}
}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(Errc::validation_error, join_problems(problems)), problems_(std::move(problems)) {}

}  // namespace careloop
