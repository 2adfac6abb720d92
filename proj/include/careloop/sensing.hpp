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
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "careloop/errors.hpp"
#include "careloop/types.hpp"

namespace careloop::sensing {

// Event-based sensors fire on a predicate over the underlying signal rather
// than on a clock.
struct ThresholdCross {
  double level = 0.0;
  Direction direction = Direction::above;
};

struct DeltaExceeds {
  double delta = 0.0;  // >= 0
};

using EventPredicate = std::variant<ThresholdCross, DeltaExceeds>;

struct TimeBased {
  SimTime period_ms = 0;  // > 0
};

struct EventBased {
  EventPredicate predicate;
};

using SensorMode = std::variant<TimeBased, EventBased>;

enum class Interpolation { step, linear };

struct TracePoint {
  SimTime t = 0;
  double value = 0.0;
};

/// Scenario-defined signal a simulated sensor reads from. Points are strictly
/// increasing in t; sampling before the first point is an error, sampling past
/// the last point clamps to the last value.
struct SignalTrace {
  std::string metric;
  std::vector<TracePoint> points;
  Interpolation interpolation = Interpolation::step;
};

double sample_trace(const SignalTrace& trace, SimTime t);

struct ActivityObservation {
  ActivityState state = ActivityState::unknown;
  std::string location;
  SimTime since = 0;  // when the current state began
};

/// One (state, location) timeline entry for an activity sensor.
struct ActivityScriptEntry {
  SimTime t = 0;
  ActivityState state = ActivityState::unknown;
  std::string location;
};

struct ActivityScript {
  std::vector<ActivityScriptEntry> entries;  // strictly increasing t

  // Step semantics: the entry in force at time t (last entry with entry.t <= t).
  const ActivityScriptEntry& at(SimTime t) const;
};

// Numeric encoding used when an activity script drives a value-typed sensor
// (event predicates compare codes; any state change is a delta of >= 1).
double activity_code(ActivityState s);

struct Reading {
  SensorId sensor;
  ElementId element;
  std::string metric;
  double value = 0.0;
  SimTime timestamp = 0;  // simulated ms at emission
  std::uint64_t seq = 0;  // strictly increasing per sensor
  std::optional<ActivityObservation> activity;
};

constexpr SimTime kNeverEmitted = std::numeric_limits<SimTime>::min();

/// Mutable per-sensor driver state owned by the simulation kernel.
struct SensorState {
  SensorId id;
  ElementId element;  // empty until associated
  std::string metric;
  SimTime period_ms = 0;                      // time-based mode
  std::optional<EventPredicate> predicate;    // event-based mode
  SimTime last_emission = kNeverEmitted;
  std::optional<double> last_value;           // event mode: previous observed value
  std::uint64_t next_seq = 0;
};

/// Time-based sampling: emits iff the period has elapsed since the last
/// emission (first poll always emits). The value is sample_trace(trace, now).
std::optional<Reading> poll(SensorState& state, const SignalTrace& trace, SimTime now);

/// Event-based sampling: edge-triggered predicate evaluation against the
/// previous observed value. The first value ever seen never emits.
std::optional<Reading> on_change(SensorState& state, SimTime t, double new_value);

}  // namespace careloop::sensing
