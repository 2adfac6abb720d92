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

#include <cstdint>
#include <string>

namespace careloop {

/// Simulated time in integer milliseconds; the kernel never deals in
/// fractional time.
using SimTime = std::int64_t;

// Identifiers are caller-supplied opaque tokens; nothing in the framework
// generates ids.
using ElementId = std::string;
using SensorId = std::string;
using PartyId = std::string;
using NodeId = std::string;
using LoopId = std::string;

enum class Direction { above, below };

enum class Severity { info = 0, warning = 1, critical = 2 };

enum class ActivityState { unknown = 0, moving, laying_in_bed, sitting, standing };

const char* to_string(Direction d);
const char* to_string(Severity s);
const char* to_string(ActivityState s);

bool parse_direction(const std::string& text, Direction& out);
bool parse_severity(const std::string& text, Severity& out);
bool parse_activity_state(const std::string& text, ActivityState& out);

/// Shortest round-trip decimal rendering (std::to_chars). Every double that
/// reaches the event log or a report goes through this.
std::string format_double(double v);

}  // namespace careloop
