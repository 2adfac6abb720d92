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

#include "careloop/netsim.hpp"

#include <algorithm>
#include <set>

namespace careloop::netsim {

const char* to_string(Layer l) {
  switch (l) {
    case Layer::device: return "device";
    case Layer::fog: return "fog";
    case Layer::cloud: return "cloud";
    case Layer::application: return "application";
  }
  return "?";
}

bool parse_layer(const std::string& text, Layer& out) {
  if (text == "device") { out = Layer::device; return true; }
  if (text == "fog") { out = Layer::fog; return true; }
  if (text == "cloud") { out = Layer::cloud; return true; }
  if (text == "application") { out = Layer::application; return true; }
  return false;
}

void Kernel::schedule(SimTime at, std::function<void()> fn) {
  if (at < now_) {
    throw Error(Errc::time_travel, "schedule at t=" + std::to_string(at) + " before clock t=" +
                                       std::to_string(now_));
  }
  queue_.push(Entry{at, next_seq_++, std::move(fn)});
}

std::optional<SimTime> Kernel::advance() {
  if (queue_.empty()) {
    return std::nullopt;
  }
  // priority_queue::top is const; the handler is moved out via const_cast,
  // which is safe because the entry is popped immediately after.
  Entry entry = std::move(const_cast<Entry&>(queue_.top()));
  queue_.pop();
  now_ = entry.at;
  ++processed_;
  entry.fn();
  return entry.at;
}

void Kernel::run_until(SimTime end) {
  while (!queue_.empty() && queue_.top().at <= end) {
    advance();
  }
  if (end > now_) {
    now_ = end;
  }
}

void Topology::add_node(Node node) {
  auto [it, inserted] = nodes_.emplace(node.id, node);
  if (!inserted) {
    throw Error(Errc::duplicate_id, "node '" + it->first + "'");
  }
  route_cache_.clear();
}

void Topology::add_link(Link link) {
  if (!has_node(link.a) || !has_node(link.b)) {
    throw Error(Errc::not_found, "link endpoint '" + (has_node(link.a) ? link.b : link.a) + "'");
  }
  if (link.latency_ms < 0) {
    throw Error(Errc::invalid_field, "negative latency on link " + link.a + "-" + link.b);
  }
  links_.push_back(link);
  adjacency_[link.a].push_back(links_.size() - 1);
  adjacency_[link.b].push_back(links_.size() - 1);
  route_cache_.clear();
}

const Node& Topology::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw Error(Errc::not_found, "node '" + id + "'");
  }
  return it->second;
}

std::optional<Route> Topology::route(const NodeId& src, const NodeId& dst) const {
  const auto key = std::make_pair(src, dst);
  if (auto it = route_cache_.find(key); it != route_cache_.end()) {
    return it->second;
  }
  if (!has_node(src) || !has_node(dst)) {
    route_cache_[key] = std::nullopt;
    return std::nullopt;
  }

  // Dijkstra over total latency. Ties settle on the lexicographically
  // smaller predecessor path, keeping replays identical.
  struct Best {
    SimTime dist;
    NodeId prev;
    std::size_t prev_link;
  };
  std::map<NodeId, Best> best;
  std::set<NodeId> done;
  best[src] = Best{0, "", 0};
  std::set<std::pair<SimTime, NodeId>> frontier{{0, src}};

  while (!frontier.empty()) {
    auto [dist, at] = *frontier.begin();
    frontier.erase(frontier.begin());
    if (!done.insert(at).second) {
      continue;
    }
    if (at == dst) {
      break;
    }
    // Device and application nodes terminate paths; only fog and cloud nodes
    // relay traffic.
    if (at != src) {
      const Layer layer = nodes_.at(at).layer;
      if (layer == Layer::device || layer == Layer::application) {
        continue;
      }
    }
    auto adj = adjacency_.find(at);
    if (adj == adjacency_.end()) {
      continue;
    }
    for (std::size_t idx : adj->second) {
      const Link& link = links_[idx];
      const NodeId& other = link.a == at ? link.b : link.a;
      if (done.count(other) != 0) {
        continue;  // finalized; ties resolved at pop time
      }
      const SimTime cand = dist + link.latency_ms;
      auto it = best.find(other);
      if (it == best.end() || cand < it->second.dist ||
          (cand == it->second.dist && at < it->second.prev)) {
        if (it != best.end()) {
          frontier.erase({it->second.dist, other});
        }
        best[other] = Best{cand, at, idx};
        frontier.insert({cand, other});
      }
    }
  }

  auto found = best.find(dst);
  if (found == best.end()) {
    route_cache_[key] = std::nullopt;
    return std::nullopt;
  }

  Route route;
  route.total_latency = found->second.dist;
  NodeId walk = dst;
  while (walk != src) {
    route.path.push_back(walk);
    const Best& b = best.at(walk);
    route.total_overhead += links_[b.prev_link].overhead_bytes;
    walk = b.prev;
  }
  route.path.push_back(src);
  std::reverse(route.path.begin(), route.path.end());
  route_cache_[key] = route;
  return route;
}

void EventLog::record(SimTime t, const std::string& node, const std::string& kind,
                      const std::string& details) {
  lines_.push_back(std::to_string(t) + "|" + node + "|" + kind + "|" + details);
}

std::string EventLog::joined() const {
  std::string out;
  for (const auto& line : lines_) {
    out += line;
    out += "\n";
  }
  return out;
}

void Metrics::record_latency(const LoopId& loop, SimTime sample) {
  decision_latency[loop].push_back(sample);
}

std::uint64_t Metrics::ingress(Layer layer) const {
  auto it = layer_ingress_bytes.find(layer);
  return it == layer_ingress_bytes.end() ? 0 : it->second;
}

Network::Network(Kernel& kernel, Topology& topo, Metrics& metrics, EventLog& log)
    : kernel_(kernel), topo_(topo), metrics_(metrics), log_(log) {}

void Network::register_handler(const NodeId& node, Handler handler) {
  handlers_[node] = std::move(handler);
}

std::uint64_t Network::send(const NodeId& src, const NodeId& dst, const std::string& kind,
                            std::uint64_t payload_size, std::any payload,
                            std::vector<LatencyTag> latency_tags) {
  auto route = topo_.route(src, dst);
  if (!route.has_value()) {
    throw Error(Errc::no_route, src + " -> " + dst);
  }

  Message msg;
  msg.id = next_message_id_++;
  msg.src = src;
  msg.dst = dst;
  msg.kind = kind;
  msg.payload_size = payload_size;
  msg.sent_at = kernel_.now();
  msg.deliver_at = msg.sent_at + route->total_latency;
  msg.payload = std::move(payload);
  msg.latency_tags = std::move(latency_tags);

  ++metrics_.messages_sent;
  log_.record(msg.sent_at, src, "send",
              "msg=" + std::to_string(msg.id) + " kind=" + kind + " dst=" + dst +
                  " bytes=" + std::to_string(payload_size));

  const Route hops = *route;
  kernel_.schedule(msg.deliver_at, [this, msg = std::move(msg), hops]() mutable {
    // Ingress accounting covers every hop arrival, transit included; the
    // per-hop cost is the payload plus that link's overhead.
    for (std::size_t i = 1; i < hops.path.size(); ++i) {
      const NodeId& from = hops.path[i - 1];
      const NodeId& to = hops.path[i];
      std::uint64_t overhead = 0;
      for (const Link& l : topo_.links()) {
        if ((l.a == from && l.b == to) || (l.a == to && l.b == from)) {
          overhead = l.overhead_bytes;
          break;
        }
      }
      metrics_.layer_ingress_bytes[topo_.node(to).layer] += msg.payload_size + overhead;
      metrics_.link_hop_messages[from + ">" + to] += 1;
    }
    metrics_.bytes_by_kind[msg.kind] += msg.payload_size;
    ++metrics_.messages_delivered;

    log_.record(msg.deliver_at, msg.dst, "deliver",
                "msg=" + std::to_string(msg.id) + " kind=" + msg.kind + " src=" + msg.src +
                    " bytes=" + std::to_string(msg.payload_size));

    for (const auto& tag : msg.latency_tags) {
      metrics_.record_latency(tag.loop, msg.deliver_at - tag.reading_emitted_at);
    }

    if (auto it = handlers_.find(msg.dst); it != handlers_.end()) {
      it->second(msg);
    }
  });
  return msg.id;
}

}  // namespace careloop::netsim
