#include "doctest.h"

#include <random>

#include "careloop/sensing.hpp"

using namespace careloop;
using namespace careloop::sensing;

namespace {

SignalTrace make_trace(Interpolation interp) {
  SignalTrace t;
  t.metric = "body_temp";
  t.interpolation = interp;
  t.points = {{0, 36.5}, {100, 39.0}};
  return t;
}

SensorState time_state(SimTime period) {
  SensorState s;
  s.id = "s1";
  s.element = "p1";
  s.metric = "body_temp";
  s.period_ms = period;
  return s;
}

}  // namespace

TEST_CASE("step trace holds the last point at or before t") {
  CHECK(sample_trace(make_trace(Interpolation::step), 50) == 36.5);
  CHECK(sample_trace(make_trace(Interpolation::step), 0) == 36.5);
  CHECK(sample_trace(make_trace(Interpolation::step), 100) == 39.0);
}

TEST_CASE("linear trace interpolates between bracketing points") {
  CHECK(sample_trace(make_trace(Interpolation::linear), 50) == doctest::Approx(37.75));
}

TEST_CASE("sampling past the last point clamps to the last value") {
  CHECK(sample_trace(make_trace(Interpolation::linear), 250) == 39.0);
}

TEST_CASE("sampling before the first point is an error") {
  SignalTrace t = make_trace(Interpolation::step);
  t.points = {{100, 36.5}};
  CHECK_THROWS_AS(sample_trace(t, 50), Error);
  try {
    sample_trace(t, 50);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::before_trace_start);
  }
}

TEST_CASE("linear samples stay between bracketing point values") {
  std::mt19937 rng(7);
  SignalTrace t;
  t.metric = "m";
  t.interpolation = Interpolation::linear;
  SimTime at = 0;
  for (int i = 0; i < 10; ++i) {
    t.points.push_back({at, 30.0 + static_cast<double>(rng() % 1000) / 100.0});
    at += 1 + static_cast<SimTime>(rng() % 500);
  }
  for (int trial = 0; trial < 500; ++trial) {
    const SimTime q = static_cast<SimTime>(rng() % static_cast<std::uint64_t>(at));
    const double v = sample_trace(t, q);
    // find bracketing values
    std::size_t i = 0;
    while (i + 1 < t.points.size() && t.points[i + 1].t <= q) {
      ++i;
    }
    const double lo = std::min(t.points[i].value,
                               t.points[std::min(i + 1, t.points.size() - 1)].value);
    const double hi = std::max(t.points[i].value,
                               t.points[std::min(i + 1, t.points.size() - 1)].value);
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
}

TEST_CASE("poll gates emissions on the period") {
  auto state = time_state(1000);
  auto trace = make_trace(Interpolation::step);
  CHECK(poll(state, trace, 0).has_value());    // first poll always emits
  CHECK_FALSE(poll(state, trace, 500).has_value());
  CHECK(poll(state, trace, 1000).has_value());
}

TEST_CASE("poll emission count over a horizon is floor(T/period) + 1") {
  auto state = time_state(1000);
  SignalTrace trace = make_trace(Interpolation::step);
  // Independent enumeration of due times: 0, 1000, ..., 10000 -> 11 readings.
  int expected = 0;
  for (SimTime t = 0; t <= 10000; t += 1000) {
    ++expected;
  }
  int emitted = 0;
  for (SimTime t = 0; t <= 10000; t += 250) {  // poll denser than the period
    if (poll(state, trace, t).has_value()) {
      ++emitted;
    }
  }
  CHECK(expected == 11);
  CHECK(emitted == expected);
}

TEST_CASE("poll stamps monotone timestamps and strictly increasing seq") {
  auto state = time_state(500);
  auto trace = make_trace(Interpolation::linear);
  SimTime last_t = -1;
  std::uint64_t last_seq = 0;
  bool first = true;
  for (SimTime t = 0; t <= 5000; t += 500) {
    auto r = poll(state, trace, t);
    REQUIRE(r.has_value());
    CHECK(r->timestamp >= last_t);
    if (!first) {
      CHECK(r->seq == last_seq + 1);
    }
    last_t = r->timestamp;
    last_seq = r->seq;
    first = false;
  }
}

TEST_CASE("threshold crossing is edge-triggered") {
  SensorState state;
  state.id = "s_e";
  state.metric = "body_temp";
  state.predicate = ThresholdCross{38.0, Direction::above};

  CHECK_FALSE(on_change(state, 0, 37.9).has_value());  // first value never emits
  auto fired = on_change(state, 100, 38.2);
  REQUIRE(fired.has_value());
  CHECK(fired->value == 38.2);
  CHECK_FALSE(on_change(state, 200, 38.5).has_value());  // still above: no new edge
}

TEST_CASE("threshold crossing below direction") {
  SensorState state;
  state.predicate = ThresholdCross{36.0, Direction::below};
  CHECK_FALSE(on_change(state, 0, 36.5).has_value());
  CHECK(on_change(state, 1, 35.9).has_value());
  CHECK_FALSE(on_change(state, 2, 35.0).has_value());
}

TEST_CASE("delta predicate compares absolute change") {
  SensorState state;
  state.predicate = DeltaExceeds{0.5};
  CHECK_FALSE(on_change(state, 0, 36.6).has_value());
  CHECK_FALSE(on_change(state, 1, 36.9).has_value());  // |0.3| < 0.5
  CHECK(on_change(state, 2, 37.6).has_value());        // |0.7| >= 0.5
}

TEST_CASE("a single crossing emits exactly once regardless of poll density") {
  // Signal rises through the threshold once; evaluating it at any density
  // must produce exactly one emission.
  SignalTrace trace;
  trace.metric = "m";
  trace.interpolation = Interpolation::linear;
  trace.points = {{0, 37.0}, {10000, 39.0}};
  for (SimTime tick : {1000, 500, 100, 50}) {
    SensorState state;
    state.predicate = ThresholdCross{38.0, Direction::above};
    int emissions = 0;
    for (SimTime t = 0; t <= 10000; t += tick) {
      if (on_change(state, t, sample_trace(trace, t)).has_value()) {
        ++emissions;
      }
    }
    CHECK(emissions == 1);
  }
}

TEST_CASE("activity script lookup uses step semantics") {
  ActivityScript script;
  script.entries = {{0, ActivityState::moving, "kitchen"},
                    {5000, ActivityState::laying_in_bed, "bedroom"}};
  CHECK(script.at(0).state == ActivityState::moving);
  CHECK(script.at(4999).location == "kitchen");
  CHECK(script.at(5000).state == ActivityState::laying_in_bed);
  CHECK(script.at(99999).location == "bedroom");
}
