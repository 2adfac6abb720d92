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

#include "careloop/domain_model.hpp"

#include <algorithm>

namespace careloop::domain {

const char* to_string(ElementKind k) {
  switch (k) {
    case ElementKind::patient: return "patient";
    case ElementKind::elderly: return "elderly";
    case ElementKind::disabled: return "disabled";
  }
  return "?";
}

const char* to_string(PartyRole r) {
  return r == PartyRole::medical_personnel ? "medical_personnel" : "care_giver";
}

const char* to_string(DetailLevel d) {
  switch (d) {
    case DetailLevel::full_clinical: return "full_clinical";
    case DetailLevel::summary: return "summary";
    case DetailLevel::alert_only: return "alert_only";
  }
  return "?";
}

const char* to_string(SensorCategory c) {
  switch (c) {
    case SensorCategory::physiological: return "physiological";
    case SensorCategory::environmental: return "environmental";
    case SensorCategory::activity: return "activity";
  }
  return "?";
}

bool parse_element_kind(const std::string& text, ElementKind& out) {
  if (text == "patient") { out = ElementKind::patient; return true; }
  if (text == "elderly") { out = ElementKind::elderly; return true; }
  if (text == "disabled") { out = ElementKind::disabled; return true; }
  return false;
}

bool parse_party_role(const std::string& text, PartyRole& out) {
  if (text == "medical_personnel") { out = PartyRole::medical_personnel; return true; }
  if (text == "care_giver") { out = PartyRole::care_giver; return true; }
  return false;
}

bool parse_detail_level(const std::string& text, DetailLevel& out) {
  if (text == "full_clinical") { out = DetailLevel::full_clinical; return true; }
  if (text == "summary") { out = DetailLevel::summary; return true; }
  if (text == "alert_only") { out = DetailLevel::alert_only; return true; }
  return false;
}

bool parse_sensor_category(const std::string& text, SensorCategory& out) {
  if (text == "physiological") { out = SensorCategory::physiological; return true; }
  if (text == "environmental") { out = SensorCategory::environmental; return true; }
  if (text == "activity") { out = SensorCategory::activity; return true; }
  return false;
}

std::optional<double> MedicalHistory::baseline(const std::string& metric) const {
  for (const auto& b : baselines) {
    if (b.metric == metric) {
      return b.value;
    }
  }
  return std::nullopt;
}

DetailLevel default_detail_level(PartyRole role) {
  return role == PartyRole::medical_personnel ? DetailLevel::full_clinical : DetailLevel::summary;
}

void Registry::check_history(const MedicalHistory& history) {
  std::set<std::string> seen;
  for (const auto& b : history.baselines) {
    if (!seen.insert(b.metric).second) {
      throw Error(Errc::duplicate_baseline, "two baselines for metric '" + b.metric + "'");
    }
  }
}

ElementId Registry::register_element(MonitoredElement element) {
  if (element.display_name.empty()) {
    throw Error(Errc::invalid_field, "element display_name is empty");
  }
  check_history(element.medical_history);
  auto [it, inserted] = elements_.emplace(element.id, std::move(element));
  if (!inserted) {
    throw Error(Errc::duplicate_id, "element '" + it->first + "' already registered");
  }
  return it->first;
}

CascadeInfo Registry::unregister_element(const ElementId& id) {
  auto it = elements_.find(id);
  if (it == elements_.end()) {
    throw Error(Errc::not_found, "element '" + id + "'");
  }
  CascadeInfo info;
  if (auto assoc = associations_.find(id); assoc != associations_.end()) {
    for (const auto& sensor : assoc->second) {
      info.dropped_associations.push_back(sensor);
      sensor_owner_.erase(sensor);
    }
    associations_.erase(assoc);
  }
  if (auto ints = interests_.find(id); ints != interests_.end()) {
    info.dropped_interests.assign(ints->second.begin(), ints->second.end());
    interests_.erase(ints);
  }
  elements_.erase(it);
  return info;
}

void Registry::set_medical_history(const ElementId& id, MedicalHistory history) {
  auto it = elements_.find(id);
  if (it == elements_.end()) {
    throw Error(Errc::not_found, "element '" + id + "'");
  }
  check_history(history);
  it->second.medical_history = std::move(history);
}

SensorId Registry::register_sensor(SensorDescriptor desc) {
  if (const auto* tb = std::get_if<sensing::TimeBased>(&desc.mode)) {
    if (tb->period_ms <= 0) {
      throw Error(Errc::invalid_period, "sensor '" + desc.id + "' period must be > 0");
    }
  }
  auto [it, inserted] = sensors_.emplace(desc.id, std::move(desc));
  if (!inserted) {
    throw Error(Errc::duplicate_id, "sensor '" + it->first + "' already registered");
  }
  return it->first;
}

void Registry::unregister_sensor(const SensorId& id) {
  auto it = sensors_.find(id);
  if (it == sensors_.end()) {
    throw Error(Errc::not_found, "sensor '" + id + "'");
  }
  if (auto owner = sensor_owner_.find(id); owner != sensor_owner_.end()) {
    associations_[owner->second].erase(id);
    sensor_owner_.erase(owner);
  }
  sensors_.erase(it);
}

void Registry::associate(const ElementId& element, const SensorId& sensor) {
  if (!has_element(element)) {
    throw Error(Errc::not_found, "element '" + element + "'");
  }
  if (!has_sensor(sensor)) {
    throw Error(Errc::not_found, "sensor '" + sensor + "'");
  }
  if (auto owner = sensor_owner_.find(sensor); owner != sensor_owner_.end()) {
    throw Error(Errc::already_associated,
                "sensor '" + sensor + "' already serves element '" + owner->second + "'");
  }
  associations_[element].insert(sensor);
  sensor_owner_[sensor] = element;
}

void Registry::register_interest(const InterestedParty& party, const ElementId& element) {
  if (!has_element(element)) {
    throw Error(Errc::not_found, "element '" + element + "'");
  }
  parties_.emplace(party.id, party);  // first registration wins
  auto& set = interests_[element];
  if (!set.insert(party.id).second) {
    throw Error(Errc::duplicate_interest,
                "party '" + party.id + "' already observes element '" + element + "'");
  }
}

void Registry::unregister_interest(const PartyId& party, const ElementId& element) {
  auto it = interests_.find(element);
  if (it == interests_.end() || it->second.erase(party) == 0) {
    throw Error(Errc::not_found, "no interest of '" + party + "' in '" + element + "'");
  }
}

const MonitoredElement& Registry::element(const ElementId& id) const {
  auto it = elements_.find(id);
  if (it == elements_.end()) {
    throw Error(Errc::not_found, "element '" + id + "'");
  }
  return it->second;
}

const SensorDescriptor& Registry::sensor(const SensorId& id) const {
  auto it = sensors_.find(id);
  if (it == sensors_.end()) {
    throw Error(Errc::not_found, "sensor '" + id + "'");
  }
  return it->second;
}

const InterestedParty& Registry::party(const PartyId& id) const {
  auto it = parties_.find(id);
  if (it == parties_.end()) {
    throw Error(Errc::not_found, "party '" + id + "'");
  }
  return it->second;
}

const std::set<SensorId>& Registry::sensors_of(const ElementId& element) const {
  static const std::set<SensorId> kEmpty;
  auto it = associations_.find(element);
  return it == associations_.end() ? kEmpty : it->second;
}

const std::set<PartyId>& Registry::observers(const ElementId& element) const {
  static const std::set<PartyId> kEmpty;
  auto it = interests_.find(element);
  return it == interests_.end() ? kEmpty : it->second;
}

std::optional<ElementId> Registry::element_of_sensor(const SensorId& sensor) const {
  auto it = sensor_owner_.find(sensor);
  if (it == sensor_owner_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::vector<ElementId> Registry::element_ids() const {
  std::vector<ElementId> out;
  out.reserve(elements_.size());
  for (const auto& [id, _] : elements_) {
    out.push_back(id);
  }
  return out;
}

std::vector<SensorId> Registry::sensor_ids() const {
  std::vector<SensorId> out;
  out.reserve(sensors_.size());
  for (const auto& [id, _] : sensors_) {
    out.push_back(id);
  }
  return out;
}

}  // namespace careloop::domain
