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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "careloop/errors.hpp"
#include "careloop/sensing.hpp"
#include "careloop/types.hpp"

namespace careloop::domain {

enum class ElementKind { patient, elderly, disabled };
enum class PartyRole { medical_personnel, care_giver };
enum class DetailLevel { full_clinical, summary, alert_only };
enum class SensorCategory { physiological, environmental, activity };

const char* to_string(ElementKind k);
const char* to_string(PartyRole r);
const char* to_string(DetailLevel d);
const char* to_string(SensorCategory c);
bool parse_element_kind(const std::string& text, ElementKind& out);
bool parse_party_role(const std::string& text, PartyRole& out);
bool parse_detail_level(const std::string& text, DetailLevel& out);
bool parse_sensor_category(const std::string& text, SensorCategory& out);

/// The initial knowledge about a monitored person: prior conditions plus
/// per-metric baselines the detectors can offset against.
struct MedicalHistory {
  struct Condition {
    std::string code;
    std::string onset;  // ISO date text
  };
  struct Baseline {
    std::string metric;
    double value = 0.0;
    std::string unit;
  };
  std::vector<Condition> conditions;
  std::vector<Baseline> baselines;  // at most one entry per metric name
  std::string notes;

  std::optional<double> baseline(const std::string& metric) const;
};

struct MonitoredElement {
  ElementId id;
  ElementKind kind = ElementKind::patient;
  std::string display_name;
  MedicalHistory medical_history;
};

struct SensorDescriptor {
  SensorId id;
  SensorCategory category = SensorCategory::physiological;
  std::string metric_name;
  std::string metric_unit;
  sensing::SensorMode mode;
  NodeId host_node;  // device-layer node
};

struct InterestedParty {
  PartyId id;
  PartyRole role = PartyRole::care_giver;
  DetailLevel detail_level = DetailLevel::summary;
};

DetailLevel default_detail_level(PartyRole role);

/// What unregistering an element swept away; the caller logs it.
struct CascadeInfo {
  std::vector<SensorId> dropped_associations;
  std::vector<PartyId> dropped_interests;
};

/// Registries and identity for elements, sensors, parties, and their
/// associations. Owned by the simulation kernel; mutated only between events.
class Registry {
 public:
  ElementId register_element(MonitoredElement element);
  CascadeInfo unregister_element(const ElementId& id);
  void set_medical_history(const ElementId& id, MedicalHistory history);

  SensorId register_sensor(SensorDescriptor desc);
  void unregister_sensor(const SensorId& id);

  // One element per sensor: provenance of a reading is never ambiguous.
  void associate(const ElementId& element, const SensorId& sensor);

  void register_interest(const InterestedParty& party, const ElementId& element);
  void unregister_interest(const PartyId& party, const ElementId& element);

  const MonitoredElement& element(const ElementId& id) const;
  const SensorDescriptor& sensor(const SensorId& id) const;
  const InterestedParty& party(const PartyId& id) const;
  bool has_element(const ElementId& id) const { return elements_.count(id) != 0; }
  bool has_sensor(const SensorId& id) const { return sensors_.count(id) != 0; }
  bool has_party(const PartyId& id) const { return parties_.count(id) != 0; }

  /// Sensors associated with an element (empty set when none).
  const std::set<SensorId>& sensors_of(const ElementId& element) const;
  /// Parties currently registered on an element (empty set when none).
  const std::set<PartyId>& observers(const ElementId& element) const;
  std::optional<ElementId> element_of_sensor(const SensorId& sensor) const;

  std::vector<ElementId> element_ids() const;
  std::vector<SensorId> sensor_ids() const;
  std::size_t element_count() const { return elements_.size(); }

 private:
  static void check_history(const MedicalHistory& history);

  std::map<ElementId, MonitoredElement> elements_;
  std::map<SensorId, SensorDescriptor> sensors_;
  std::map<PartyId, InterestedParty> parties_;
  std::map<ElementId, std::set<SensorId>> associations_;
  std::map<SensorId, ElementId> sensor_owner_;
  std::map<ElementId, std::set<PartyId>> interests_;
};

}  // namespace careloop::domain
