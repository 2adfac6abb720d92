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

#include "careloop/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace careloop::sensing {

double sample_trace(const SignalTrace& trace, SimTime t) {
  const auto& pts = trace.points;
  if (pts.empty()) {
    throw Error(Errc::invalid_field, "trace for '" + trace.metric + "' has no points");
  }
  if (t < pts.front().t) {
    throw Error(Errc::before_trace_start,
                "t=" + std::to_string(t) + " precedes trace start " + std::to_string(pts.front().t));
  }
  if (t >= pts.back().t) {
    return pts.back().value;
  }
  // First point with p.t > t; its predecessor holds at or before t.
  auto upper = std::upper_bound(pts.begin(), pts.end(), t,
                                [](SimTime v, const TracePoint& p) { return v < p.t; });
  const TracePoint& next = *upper;
  const TracePoint& prev = *(upper - 1);
  if (trace.interpolation == Interpolation::step) {
    return prev.value;
  }
  const double span = static_cast<double>(next.t - prev.t);
  const double frac = static_cast<double>(t - prev.t) / span;
  return prev.value + (next.value - prev.value) * frac;
}

const ActivityScriptEntry& ActivityScript::at(SimTime t) const {
  if (entries.empty()) {
    throw Error(Errc::invalid_field, "activity script is empty");
  }
  if (t < entries.front().t) {
    throw Error(Errc::before_trace_start, "t precedes activity script start");
  }
  auto upper = std::upper_bound(entries.begin(), entries.end(), t,
                                [](SimTime v, const ActivityScriptEntry& e) { return v < e.t; });
  return *(upper - 1);
}

double activity_code(ActivityState s) {
  return static_cast<double>(static_cast<int>(s));
}

std::optional<Reading> poll(SensorState& state, const SignalTrace& trace, SimTime now) {
  if (state.last_emission != kNeverEmitted && now < state.last_emission + state.period_ms) {
    return std::nullopt;
  }
  Reading r;
  r.sensor = state.id;
  r.element = state.element;
  r.metric = state.metric;
  r.value = sample_trace(trace, now);
  r.timestamp = now;
  r.seq = state.next_seq++;
  state.last_emission = now;
  return r;
}

std::optional<Reading> on_change(SensorState& state, SimTime t, double new_value) {
  const std::optional<double> prev = state.last_value;
  state.last_value = new_value;
  if (!prev.has_value() || !state.predicate.has_value()) {
    return std::nullopt;  // first observation establishes the baseline
  }

  bool fire = false;
  if (const auto* tc = std::get_if<ThresholdCross>(&*state.predicate)) {
    if (tc->direction == Direction::above) {
      fire = *prev < tc->level && tc->level <= new_value;
    } else {
      fire = *prev > tc->level && tc->level >= new_value;
    }
  } else {
    const auto& de = std::get<DeltaExceeds>(*state.predicate);
    fire = std::abs(new_value - *prev) >= de.delta;
  }
  if (!fire) {
    return std::nullopt;
  }

  Reading r;
  r.sensor = state.id;
  r.element = state.element;
  r.metric = state.metric;
  r.value = new_value;
  r.timestamp = t;
  r.seq = state.next_seq++;
  state.last_emission = t;
  return r;
}

}  // namespace careloop::sensing
