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

#include "careloop/context_mgmt.hpp"

#include <algorithm>

namespace careloop::context {

const std::map<std::string, MetricValue>& ContextSnapshot::category(
    domain::SensorCategory c) const {
  return c == domain::SensorCategory::environmental ? environmental : physiological;
}

std::optional<double> ContextSnapshot::metric(const std::string& name) const {
  if (auto it = physiological.find(name); it != physiological.end()) {
    return it->second.value;
  }
  if (auto it = environmental.find(name); it != environmental.end()) {
    return it->second.value;
  }
  return std::nullopt;
}

std::string ContextSnapshot::digest() const {
  std::string out;
  for (const auto& [name, mv] : physiological) {
    out += "p:" + name + "=" + format_double(mv.value) + ";";
  }
  for (const auto& [name, mv] : environmental) {
    out += "e:" + name + "=" + format_double(mv.value) + ";";
  }
  out += "a:" + std::string(to_string(activity.state)) + "@" + activity.location;
  return out;
}

ContextSnapshot assemble_context(const ElementId& element,
                                 const std::vector<sensing::Reading>& recent,
                                 const ContextSnapshot* previous,
                                 SimTime now,
                                 const MetricCategories& categories) {
  ContextSnapshot snap;
  snap.element = element;
  snap.timestamp = now;

  // Latest reading per metric within this window wins.
  std::map<std::string, const sensing::Reading*> freshest;
  const sensing::Reading* fresh_activity = nullptr;
  for (const auto& r : recent) {
    if (r.activity.has_value()) {
      if (fresh_activity == nullptr || r.timestamp >= fresh_activity->timestamp) {
        fresh_activity = &r;
      }
      continue;
    }
    auto [it, inserted] = freshest.emplace(r.metric, &r);
    if (!inserted && r.timestamp >= it->second->timestamp) {
      it->second = &r;
    }
  }

  auto place = [&](const std::string& name, const MetricValue& mv) {
    auto cat = domain::SensorCategory::physiological;
    if (auto it = categories.find(name); it != categories.end()) {
      cat = it->second;
    }
    if (cat == domain::SensorCategory::environmental) {
      snap.environmental[name] = mv;
    } else {
      snap.physiological[name] = mv;
    }
  };

  for (const auto& [name, reading] : freshest) {
    place(name, MetricValue{reading->value, reading->timestamp, 0});
  }

  // Carry forward everything the previous snapshot knew and this window did
  // not refresh, with a staleness stamp.
  if (previous != nullptr) {
    auto carry = [&](const std::map<std::string, MetricValue>& source) {
      for (const auto& [name, mv] : source) {
        if (freshest.count(name) != 0) {
          continue;
        }
        if (mv.stale_assemblies + 1 > kStaleLimit) {
          continue;  // downgraded to absent
        }
        place(name, MetricValue{mv.value, mv.observed_at, mv.stale_assemblies + 1});
      }
    };
    carry(previous->physiological);
    carry(previous->environmental);
  }

  if (fresh_activity != nullptr) {
    const auto& obs = *fresh_activity->activity;
    snap.activity = ActivityRecord{obs.state, obs.location, obs.since};
  } else if (previous != nullptr) {
    snap.activity = previous->activity;
  } else {
    snap.activity = ActivityRecord{};  // unknown
  }

  return snap;
}

ContextHistory::ContextHistory(ElementId element, std::size_t capacity)
    : element_(std::move(element)), capacity_(capacity == 0 ? 1 : capacity) {}

void ContextHistory::append(ContextSnapshot snap) {
  if (!snapshots_.empty() && snap.timestamp <= snapshots_.back().timestamp) {
    throw Error(Errc::non_monotone_timestamp,
                "snapshot t=" + std::to_string(snap.timestamp) + " not after t=" +
                    std::to_string(snapshots_.back().timestamp));
  }
  snapshots_.push_back(std::move(snap));
  if (snapshots_.size() > capacity_) {
    snapshots_.pop_front();
  }
}

std::vector<ContextSnapshot> ContextHistory::window(std::size_t n) const {
  const std::size_t take = std::min(n, snapshots_.size());
  return std::vector<ContextSnapshot>(snapshots_.end() - static_cast<std::ptrdiff_t>(take),
                                      snapshots_.end());
}

void ContextHistory::clear() {
  snapshots_.clear();
}

const ContextSnapshot& ContextHistory::latest() const {
  if (snapshots_.empty()) {
    throw Error(Errc::not_found, "history for '" + element_ + "' is empty");
  }
  return snapshots_.back();
}

}  // namespace careloop::context
