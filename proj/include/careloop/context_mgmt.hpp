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

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "careloop/domain_model.hpp"
#include "careloop/sensing.hpp"
#include "careloop/types.hpp"

namespace careloop::context {

struct ActivityRecord {
  ActivityState state = ActivityState::unknown;
  std::string location;
  SimTime since = 0;
};

/// One observed metric inside a snapshot. stale_assemblies counts how many
/// consecutive assemblies carried the value forward without a fresh reading;
/// past kStaleLimit the metric is dropped from the next snapshot.
struct MetricValue {
  double value = 0.0;
  SimTime observed_at = 0;  // emission time of the sourcing reading
  int stale_assemblies = 0;
};

constexpr int kStaleLimit = 10;

/// The three-category context of an element at one instant: physiological and
/// environmental metric maps plus the activity record.
struct ContextSnapshot {
  ElementId element;
  SimTime timestamp = 0;
  std::map<std::string, MetricValue> physiological;
  std::map<std::string, MetricValue> environmental;
  ActivityRecord activity;

  const std::map<std::string, MetricValue>& category(domain::SensorCategory c) const;
  std::optional<double> metric(const std::string& name) const;  // searches both maps

  /// Content digest for change detection: metric values and activity
  /// state/location only. Timestamps and staleness are deliberately excluded
  /// so an unchanged situation compares equal across assemblies.
  std::string digest() const;
};

using MetricCategories = std::map<std::string, domain::SensorCategory>;

/// Builds the context of an element at `now` from the readings that arrived
/// since the previous assembly. Latest reading per metric wins; metrics with
/// no fresh reading carry forward from `previous` until kStaleLimit assemblies
/// have passed, after which they go absent.
ContextSnapshot assemble_context(const ElementId& element,
                                 const std::vector<sensing::Reading>& recent,
                                 const ContextSnapshot* previous,
                                 SimTime now,
                                 const MetricCategories& categories);

/// Bounded ring of snapshots per element, strictly increasing in time.
class ContextHistory {
 public:
  ContextHistory() = default;
  ContextHistory(ElementId element, std::size_t capacity);

  void append(ContextSnapshot snap);  // throws NonMonotoneTimestamp
  std::vector<ContextSnapshot> window(std::size_t n) const;
  void clear();

  std::size_t size() const { return snapshots_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return snapshots_.empty(); }
  const ContextSnapshot& latest() const;
  const std::deque<ContextSnapshot>& snapshots() const { return snapshots_; }
  const ElementId& element() const { return element_; }

 private:
  ElementId element_;
  std::size_t capacity_ = 256;
  std::deque<ContextSnapshot> snapshots_;
};

}  // namespace careloop::context
