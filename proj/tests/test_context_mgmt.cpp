#include "doctest.h"

#include <random>

#include "careloop/context_mgmt.hpp"

using namespace careloop;
using namespace careloop::context;

namespace {

sensing::Reading make_reading(const std::string& metric, double value, SimTime t) {
  sensing::Reading r;
  r.sensor = "s_" + metric;
  r.element = "p1";
  r.metric = metric;
  r.value = value;
  r.timestamp = t;
  return r;
}

const MetricCategories kCats = {
    {"body_temp", domain::SensorCategory::physiological},
    {"room_temp", domain::SensorCategory::environmental},
};

}  // namespace

TEST_CASE("latest reading per metric wins within a window") {
  auto snap = assemble_context("p1", {make_reading("body_temp", 39.0, 10),
                                      make_reading("body_temp", 39.2, 20)},
                               nullptr, 100, kCats);
  REQUIRE(snap.physiological.count("body_temp") == 1);
  CHECK(snap.physiological.at("body_temp").value == 39.2);
  CHECK(snap.timestamp == 100);
}

TEST_CASE("metrics with no fresh reading carry forward from the previous snapshot") {
  auto first = assemble_context("p1", {make_reading("body_temp", 38.0, 10)}, nullptr, 100, kCats);
  auto second = assemble_context("p1", {}, &first, 200, kCats);
  REQUIRE(second.physiological.count("body_temp") == 1);
  CHECK(second.physiological.at("body_temp").value == 38.0);
  CHECK(second.physiological.at("body_temp").stale_assemblies == 1);
}

TEST_CASE("no readings ever yields empty maps and unknown activity") {
  auto snap = assemble_context("p1", {}, nullptr, 100, kCats);
  CHECK(snap.physiological.empty());
  CHECK(snap.environmental.empty());
  CHECK(snap.activity.state == ActivityState::unknown);
}

TEST_CASE("stale metrics downgrade to absent past the limit") {
  auto snap = assemble_context("p1", {make_reading("body_temp", 38.0, 10)}, nullptr, 0, kCats);
  for (int k = 1; k <= kStaleLimit; ++k) {
    snap = assemble_context("p1", {}, &snap, k * 100, kCats);
    REQUIRE(snap.physiological.count("body_temp") == 1);
    CHECK(snap.physiological.at("body_temp").value == 38.0);
  }
  snap = assemble_context("p1", {}, &snap, (kStaleLimit + 1) * 100, kCats);
  CHECK(snap.physiological.count("body_temp") == 0);
}

TEST_CASE("categories route metrics into the right map") {
  auto snap = assemble_context("p1", {make_reading("body_temp", 37.0, 10),
                                      make_reading("room_temp", 22.5, 10)},
                               nullptr, 100, kCats);
  CHECK(snap.physiological.count("body_temp") == 1);
  CHECK(snap.environmental.count("room_temp") == 1);
}

TEST_CASE("activity readings update the activity record and carry forward") {
  sensing::Reading act = make_reading("activity", 1.0, 10);
  act.activity = sensing::ActivityObservation{ActivityState::moving, "kitchen", 5};
  auto first = assemble_context("p1", {act}, nullptr, 100, kCats);
  CHECK(first.activity.state == ActivityState::moving);
  CHECK(first.activity.location == "kitchen");
  CHECK(first.activity.since == 5);

  auto second = assemble_context("p1", {}, &first, 200, kCats);
  CHECK(second.activity.state == ActivityState::moving);
}

TEST_CASE("history append enforces strictly increasing timestamps") {
  ContextHistory hist("p1", 3);
  ContextSnapshot snap;
  snap.element = "p1";
  snap.timestamp = 5;
  hist.append(snap);
  CHECK_THROWS_AS(hist.append(snap), Error);
  try {
    hist.append(snap);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_monotone_timestamp);
  }
}

TEST_CASE("history evicts oldest first at capacity") {
  ContextHistory hist("p1", 3);
  for (SimTime t = 1; t <= 4; ++t) {
    ContextSnapshot snap;
    snap.element = "p1";
    snap.timestamp = t;
    hist.append(snap);
  }
  CHECK(hist.size() == 3);
  const auto window = hist.window(10);
  CHECK(window.front().timestamp == 2);
  CHECK(window.back().timestamp == 4);
}

TEST_CASE("window selects the suffix") {
  ContextHistory hist("p1", 8);
  for (SimTime t = 2; t <= 4; ++t) {
    ContextSnapshot snap;
    snap.timestamp = t;
    hist.append(snap);
  }
  CHECK(hist.window(0).empty());
  CHECK(hist.window(2).size() == 2);
  CHECK(hist.window(2).front().timestamp == 3);
  CHECK(hist.window(1).back().timestamp == 4);
  CHECK(hist.window(99).size() == 3);
}

TEST_CASE("clear empties the history but keeps capacity; clearing twice is fine") {
  ContextHistory hist("p1", 5);
  ContextSnapshot snap;
  snap.timestamp = 1;
  hist.append(snap);
  hist.clear();
  CHECK(hist.empty());
  CHECK(hist.capacity() == 5);
  hist.clear();
  CHECK(hist.window(3).empty());
}

TEST_CASE("assembly is deterministic for a fixed reading multiset") {
  const std::vector<sensing::Reading> readings = {make_reading("body_temp", 37.5, 10),
                                                  make_reading("room_temp", 21.0, 12),
                                                  make_reading("body_temp", 37.9, 15)};
  auto a = assemble_context("p1", readings, nullptr, 100, kCats);
  auto b = assemble_context("p1", readings, nullptr, 100, kCats);
  CHECK(a.digest() == b.digest());
}

TEST_CASE("property: bounded size, monotone time, FIFO eviction, carry-forward") {
  std::mt19937 rng(424242);
  for (int round = 0; round < 20; ++round) {
    const std::size_t capacity = 1 + rng() % 12;
    ContextHistory hist("p1", capacity);
    ContextSnapshot prev;
    bool have_prev = false;
    SimTime t = 0;
    double last_value = 0.0;
    int since_fresh = 0;
    std::vector<SimTime> appended;

    for (int step = 0; step < 500; ++step) {
      t += 1 + static_cast<SimTime>(rng() % 50);
      std::vector<sensing::Reading> fresh;
      const bool emit = rng() % 3 != 0;
      if (emit) {
        last_value = 35.0 + static_cast<double>(rng() % 400) / 100.0;
        fresh.push_back(make_reading("body_temp", last_value, t));
        since_fresh = 0;
      } else {
        ++since_fresh;
      }
      auto snap = assemble_context("p1", fresh, have_prev ? &prev : nullptr, t, kCats);
      if (since_fresh <= kStaleLimit && (emit || have_prev)) {
        if (snap.physiological.count("body_temp") != 0) {
          CHECK(snap.physiological.at("body_temp").value == last_value);
        }
      }
      prev = snap;
      have_prev = true;
      hist.append(std::move(snap));
      appended.push_back(t);

      CHECK(hist.size() <= capacity);
      const auto window = hist.window(hist.size());
      for (std::size_t i = 1; i < window.size(); ++i) {
        CHECK(window[i].timestamp > window[i - 1].timestamp);
      }
      // FIFO: the history is exactly the tail of everything appended.
      const std::size_t expect = std::min(appended.size(), capacity);
      CHECK(window.size() == expect);
      if (!window.empty()) {
        CHECK(window.back().timestamp == appended.back());
        CHECK(window.front().timestamp == appended[appended.size() - expect]);
      }
    }
  }
}
