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

#include <optional>
#include <string>
#include <vector>

#include "careloop/context_mgmt.hpp"
#include "careloop/domain_model.hpp"
#include "careloop/types.hpp"

namespace careloop::reasoning {

/// Current condition vs. forecast: a predicted insight names how far ahead the
/// detector was looking.
struct Horizon {
  bool predicted = false;
  SimTime lead_ms = 0;

  bool operator==(const Horizon&) const = default;
};

/// A detected or predicted condition of one element. Evidence lists the
/// snapshot timestamps the detector looked at.
struct Insight {
  std::string id;
  ElementId element;
  std::string kind;
  Severity severity = Severity::info;
  double confidence = 1.0;  // in [0,1]
  SimTime detected_at = 0;
  Horizon horizon;
  std::vector<SimTime> evidence;
  std::string explanation;
  // Which reading stream triggered this ("__activity__" for falls); used to
  // attribute decision latency back to a reading emission.
  std::string source_metric;

  /// Deduplication key: one insight per (element, kind, current-vs-predicted).
  std::string key() const;
};

enum class DetectorType { threshold, trend, fall };

struct DetectorConfig {
  DetectorType type = DetectorType::threshold;
  std::string kind;    // insight kind this detector emits, e.g. "fever"
  std::string metric;
  double threshold = 0.0;
  Direction direction = Direction::above;
  int window_size = 2;             // trend: >= 2
  SimTime forecast_lead_ms = 0;    // trend: > 0
  bool use_baseline_offset = false;
  double offset = 0.0;
  double severity_band = 1.0;      // threshold: margin at which warning becomes critical
  SimTime fall_max_gap_ms = 0;     // fall: max gap between the two snapshots
};

/// Ordinary least squares line v = intercept + slope * t, with the coefficient
/// of determination. Computed with centered sums; millisecond timestamps far
/// from zero stay well conditioned.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

/// Throws InsufficientWindow for fewer than two points and DegenerateFit when
/// all timestamps coincide.
LineFit fit_line(const std::vector<std::pair<SimTime, double>>& points);

/// Compares the metric in `snap` against the configured (or baseline-offset)
/// threshold. Absent when the metric is missing or within bounds.
std::optional<Insight> detect_threshold(const context::ContextSnapshot& snap,
                                        const DetectorConfig& cfg,
                                        const domain::MedicalHistory& hist);

/// Fits a line over the last window_size snapshots carrying cfg.metric and
/// forecasts forecast_lead_ms past the newest one. Emits only when the
/// forecast violates the threshold while the current value does not; the
/// insight's confidence is the fit's R² clamped to [0,1].
std::optional<Insight> predict_trend(const std::vector<context::ContextSnapshot>& snaps,
                                     const DetectorConfig& cfg);

/// Fall rule: an abrupt moving -> laying_in_bed transition between consecutive
/// snapshots, outside the bedroom, within max_gap_ms.
std::optional<Insight> detect_fall(const std::vector<context::ContextSnapshot>& snaps,
                                   SimTime max_gap_ms);

struct ReasonOutcome {
  std::vector<Insight> insights;
  std::vector<std::string> diagnostics;  // detector errors; never abort the loop
};

/// Runs every configured detector over the history, deduplicates by
/// (element, kind, horizon) keeping the highest severity, and orders the
/// result by severity desc, kind asc, current before predicted.
ReasonOutcome reason(const domain::MedicalHistory& hist,
                     const context::ContextHistory& chist,
                     const std::vector<DetectorConfig>& cfgs);

}  // namespace careloop::reasoning
