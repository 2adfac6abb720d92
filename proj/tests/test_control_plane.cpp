#include "doctest.h"

#include <random>

#include "careloop/control_plane.hpp"

using namespace careloop;
using namespace careloop::control;

TEST_CASE("central aggregation sums slave reports exactly") {
  AggregateQuery query{"fever", "ward_a"};
  std::map<LoopId, AggregateReport> received = {
      {"l1", {"l1", 1, 1, 4}},
      {"l2", {"l2", 1, 2, 4}},
      {"l3", {"l3", 1, 0, 4}},
  };
  auto outcome = central_aggregate(query, 1, {"l1", "l2", "l3"}, received, "central", 99);
  CHECK(outcome.result.affected == 3);
  CHECK(outcome.result.total == 12);
  CHECK(outcome.result.percentage == 25.0);
  CHECK(outcome.missing.empty());
}

TEST_CASE("zero affected gives zero percent") {
  AggregateQuery query{"fever", "ward_a"};
  std::map<LoopId, AggregateReport> received = {{"l1", {"l1", 2, 0, 7}}};
  auto outcome = central_aggregate(query, 2, {"l1"}, received, "central", 0);
  CHECK(outcome.result.percentage == 0.0);
  CHECK(outcome.result.total == 7);
}

TEST_CASE("missing reports count as zero-affected and are flagged") {
  AggregateQuery query{"fever", "ward_a"};
  auto outcome = central_aggregate(query, 3, {"l1", "l2"}, {}, "central", 0);
  CHECK(outcome.result.affected == 0);
  CHECK(outcome.result.total == 0);
  CHECK(outcome.result.percentage == 0.0);
  CHECK(outcome.missing == std::vector<LoopId>{"l1", "l2"});
}

TEST_CASE("peer exchange: every peer computes the identical union result") {
  AggregateQuery query{"fever", "ward_a"};
  std::map<LoopId, AggregateReport> reports = {
      {"p1", {"p1", 1, 1, 4}},
      {"p2", {"p2", 1, 2, 4}},
      {"p3", {"p3", 1, 0, 4}},
  };
  auto results = peer_exchange(query, 1, reports, 50);
  REQUIRE(results.size() == 3);
  for (const auto& [_, record] : results) {
    CHECK(record.affected == 3);
    CHECK(record.total == 12);
    CHECK(record.percentage == 25.0);
  }
}

TEST_CASE("single peer group equals its own counts") {
  AggregateQuery query{"fever", "ward_a"};
  std::map<LoopId, AggregateReport> reports = {{"solo", {"solo", 4, 2, 5}}};
  auto results = peer_exchange(query, 4, reports, 0);
  REQUIRE(results.size() == 1);
  CHECK(results.at("solo").affected == 2);
  CHECK(results.at("solo").total == 5);
  CHECK(results.at("solo").percentage == 40.0);
}

TEST_CASE("property: centralized and decentralized aggregation agree") {
  std::mt19937 rng(606);
  for (int epoch = 0; epoch < 50; ++epoch) {
    const int n = 1 + static_cast<int>(rng() % 6);
    std::map<LoopId, AggregateReport> reports;
    std::set<LoopId> expected;
    for (int i = 0; i < n; ++i) {
      const auto id = "loop" + std::to_string(i);
      const std::uint64_t total = 1 + rng() % 10;
      const std::uint64_t affected = rng() % (total + 1);
      reports[id] = AggregateReport{id, static_cast<std::uint64_t>(epoch), affected, total};
      expected.insert(id);
    }
    const auto central =
        central_aggregate({"fever", "r"}, epoch, expected, reports, "central", 0).result;
    const auto peers = peer_exchange({"fever", "r"}, epoch, reports, 0);
    for (const auto& [_, record] : peers) {
      CHECK(record.affected == central.affected);
      CHECK(record.total == central.total);
      CHECK(record.percentage == central.percentage);
    }
    CHECK(central.total >= central.affected);
    CHECK(central.percentage >= 0.0);
    CHECK(central.percentage <= 100.0);
  }
}

TEST_CASE("size schedule defaults cover every message kind") {
  const auto sizes = SizeSchedule::defaults();
  CHECK(sizes.of(kMsgRawReading) == 64);
  CHECK(sizes.of(kMsgContextSummary) == 256);
  CHECK(sizes.of(kMsgInsight) == 128);
  CHECK_THROWS_AS(sizes.of("nonsense"), Error);
}
