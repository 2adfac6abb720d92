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

#include <any>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "careloop/errors.hpp"
#include "careloop/types.hpp"

namespace careloop::netsim {

enum class Layer { device, fog, cloud, application };

const char* to_string(Layer l);
bool parse_layer(const std::string& text, Layer& out);

struct Node {
  NodeId id;
  Layer layer = Layer::device;
};

struct Link {
  NodeId a;
  NodeId b;
  SimTime latency_ms = 0;          // >= 0
  std::uint64_t overhead_bytes = 0;  // per message per hop
};

/// Deterministic discrete-event kernel. Events run in (time, insertion
/// sequence) order; the clock never moves backwards. Single-threaded and
/// authoritative for simulated time.
class Kernel {
 public:
  SimTime now() const { return now_; }

  /// Throws TimeTravel when `at` precedes the current clock.
  void schedule(SimTime at, std::function<void()> fn);

  /// Runs the next pending event; returns its time, or nullopt when idle.
  std::optional<SimTime> advance();

  /// Drains every event with time <= end, then parks the clock at end.
  void run_until(SimTime end);

  std::size_t pending() const { return queue_.size(); }
  std::uint64_t processed() const { return processed_; }

 private:
  struct Entry {
    SimTime at;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Entry& x, const Entry& y) const {
      if (x.at != y.at) {
        return x.at > y.at;
      }
      return x.seq > y.seq;
    }
  };

  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
};

struct Route {
  std::vector<NodeId> path;  // src first, dst last
  SimTime total_latency = 0;
  std::uint64_t total_overhead = 0;
};

/// Layered topology with reliable, ordered links. Route lookup is minimum
/// total latency with lexicographic tie-breaks.
class Topology {
 public:
  void add_node(Node node);                 // throws DuplicateId
  void add_link(Link link);                 // throws NotFound / InvalidField

  const Node& node(const NodeId& id) const;
  bool has_node(const NodeId& id) const { return nodes_.count(id) != 0; }
  const std::vector<Link>& links() const { return links_; }

  /// Cheapest path src -> dst, or nullopt when unreachable.
  std::optional<Route> route(const NodeId& src, const NodeId& dst) const;

 private:
  std::map<NodeId, Node> nodes_;
  std::vector<Link> links_;
  std::map<NodeId, std::vector<std::size_t>> adjacency_;  // node -> link indexes
  mutable std::map<std::pair<NodeId, NodeId>, std::optional<Route>> route_cache_;
};

/// Newline-delimited run log: `time|node|kind|details` with stable field
/// order. Byte-identical across replays of the same scenario.
class EventLog {
 public:
  void record(SimTime t, const std::string& node, const std::string& kind,
              const std::string& details);
  const std::vector<std::string>& lines() const { return lines_; }
  std::string joined() const;

 private:
  std::vector<std::string> lines_;
};

/// Ties an in-flight action message back to the insight that caused it, so
/// delivery can close a decision-latency sample.
struct LatencyTag {
  LoopId loop;
  SimTime reading_emitted_at = 0;
};

struct Message {
  std::uint64_t id = 0;
  NodeId src;
  NodeId dst;
  std::string kind;
  std::uint64_t payload_size = 0;
  SimTime sent_at = 0;
  SimTime deliver_at = 0;
  std::any payload;
  std::vector<LatencyTag> latency_tags;
};

struct Metrics {
  std::map<Layer, std::uint64_t> layer_ingress_bytes;
  std::map<std::string, std::uint64_t> link_hop_messages;  // "src>dst" per hop
  std::map<std::string, std::uint64_t> bytes_by_kind;
  std::map<LoopId, std::vector<SimTime>> decision_latency;
  std::map<LoopId, std::uint64_t> remote_timeouts;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t in_flight_at_end = 0;

  void record_latency(const LoopId& loop, SimTime sample);
  std::uint64_t ingress(Layer layer) const;
};

/// Message transport over the topology: computes the route at send time,
/// schedules delivery at sent_at + path latency, accounts ingress bytes at
/// every hop arrival, and hands the message to the destination handler.
class Network {
 public:
  Network(Kernel& kernel, Topology& topo, Metrics& metrics, EventLog& log);

  using Handler = std::function<void(const Message&)>;
  void register_handler(const NodeId& node, Handler handler);

  /// Throws NoRoute when the topology offers no path.
  std::uint64_t send(const NodeId& src, const NodeId& dst, const std::string& kind,
                     std::uint64_t payload_size, std::any payload = {},
                     std::vector<LatencyTag> latency_tags = {});

 private:
  Kernel& kernel_;
  Topology& topo_;
  Metrics& metrics_;
  EventLog& log_;
  std::map<NodeId, Handler> handlers_;
  std::uint64_t next_message_id_ = 0;
  std::uint64_t delivered_ = 0;
};

}  // namespace careloop::netsim
