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

#include "careloop/reasoning.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace careloop::reasoning {

namespace {

bool violates(double value, double threshold, Direction dir) {
  return dir == Direction::above ? value >= threshold : value <= threshold;
}

double effective_threshold(const DetectorConfig& cfg, const domain::MedicalHistory& hist) {
  if (cfg.use_baseline_offset) {
    if (auto base = hist.baseline(cfg.metric)) {
      return *base + cfg.offset;
    }
  }
  return cfg.threshold;
}

std::string make_id(const ElementId& element, const std::string& kind, const Horizon& h,
                    SimTime at) {
  std::string id = element + ":" + kind + ":" + (h.predicted ? "predicted" : "current");
  id += "@" + std::to_string(at);
  return id;
}

}  // namespace

std::string Insight::key() const {
  return element + "|" + kind + "|" + (horizon.predicted ? "predicted" : "current");
}

LineFit fit_line(const std::vector<std::pair<SimTime, double>>& points) {
  const std::size_t n = points.size();
  if (n < 2) {
    throw Error(Errc::insufficient_window, "line fit needs at least 2 points, got " +
                                               std::to_string(n));
  }
  double mean_t = 0.0;
  double mean_v = 0.0;
  for (const auto& [t, v] : points) {
    mean_t += static_cast<double>(t);
    mean_v += v;
  }
  mean_t /= static_cast<double>(n);
  mean_v /= static_cast<double>(n);

  double stt = 0.0;  // sum of squared centered timestamps
  double stv = 0.0;
  for (const auto& [t, v] : points) {
    const double tc = static_cast<double>(t) - mean_t;
    stt += tc * tc;
    stv += tc * (v - mean_v);
  }
  if (stt == 0.0) {
    throw Error(Errc::degenerate_fit, "all timestamps equal in trend window");
  }

  LineFit fit;
  fit.slope = stv / stt;
  fit.intercept = mean_v - fit.slope * mean_t;

  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& [t, v] : points) {
    const double predicted = fit.intercept + fit.slope * static_cast<double>(t);
    ss_res += (v - predicted) * (v - predicted);
    ss_tot += (v - mean_v) * (v - mean_v);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

std::optional<Insight> detect_threshold(const context::ContextSnapshot& snap,
                                        const DetectorConfig& cfg,
                                        const domain::MedicalHistory& hist) {
  const auto value = snap.metric(cfg.metric);
  if (!value.has_value()) {
    return std::nullopt;
  }
  const double threshold = effective_threshold(cfg, hist);
  if (!violates(*value, threshold, cfg.direction)) {
    return std::nullopt;
  }
  const double margin = std::abs(*value - threshold);

  Insight ins;
  ins.element = snap.element;
  ins.kind = cfg.kind;
  ins.severity = margin >= cfg.severity_band ? Severity::critical : Severity::warning;
  ins.confidence = 1.0;
  ins.detected_at = snap.timestamp;
  ins.horizon = Horizon{false, 0};
  ins.evidence = {snap.timestamp};
  ins.explanation = cfg.metric + "=" + format_double(*value) + " " +
                    std::string(to_string(cfg.direction)) + " threshold " +
                    format_double(threshold);
  ins.source_metric = cfg.metric;
  ins.id = make_id(ins.element, ins.kind, ins.horizon, ins.detected_at);
  return ins;
}

std::optional<Insight> predict_trend(const std::vector<context::ContextSnapshot>& snaps,
                                     const DetectorConfig& cfg) {
  std::vector<std::pair<SimTime, double>> points;
  points.reserve(snaps.size());
  for (const auto& s : snaps) {
    if (auto v = s.metric(cfg.metric)) {
      points.emplace_back(s.timestamp, *v);
    }
  }
  const std::size_t want = static_cast<std::size_t>(std::max(cfg.window_size, 2));
  if (points.size() < want) {
    throw Error(Errc::insufficient_window,
                "trend '" + cfg.kind + "' needs " + std::to_string(want) + " snapshots with '" +
                    cfg.metric + "', got " + std::to_string(points.size()));
  }
  if (points.size() > want) {
    points.erase(points.begin(), points.end() - static_cast<std::ptrdiff_t>(want));
  }

  const LineFit fit = fit_line(points);  // may throw DegenerateFit
  const SimTime t_last = points.back().first;
  const double current = points.back().second;
  const double forecast =
      fit.intercept + fit.slope * static_cast<double>(t_last + cfg.forecast_lead_ms);

  if (!violates(forecast, cfg.threshold, cfg.direction) ||
      violates(current, cfg.threshold, cfg.direction)) {
    // The threshold detector owns conditions that already hold.
    return std::nullopt;
  }

  Insight ins;
  ins.element = snaps.back().element;
  ins.kind = cfg.kind;
  ins.severity = Severity::warning;
  ins.confidence = std::clamp(fit.r_squared, 0.0, 1.0);
  ins.detected_at = snaps.back().timestamp;
  ins.horizon = Horizon{true, cfg.forecast_lead_ms};
  ins.evidence.reserve(points.size());
  for (const auto& [t, _] : points) {
    ins.evidence.push_back(t);
  }
  ins.explanation = cfg.metric + " forecast " + format_double(forecast) + " in " +
                    std::to_string(cfg.forecast_lead_ms) + "ms (slope " +
                    format_double(fit.slope) + ")";
  ins.source_metric = cfg.metric;
  ins.id = make_id(ins.element, ins.kind, ins.horizon, ins.detected_at);
  return ins;
}

std::optional<Insight> detect_fall(const std::vector<context::ContextSnapshot>& snaps,
                                   SimTime max_gap_ms) {
  if (snaps.size() < 2) {
    return std::nullopt;
  }
  const auto& before = snaps[snaps.size() - 2];
  const auto& after = snaps.back();
  const bool abrupt = before.activity.state == ActivityState::moving &&
                      after.activity.state == ActivityState::laying_in_bed;
  if (!abrupt || after.activity.location == "bedroom" ||
      after.timestamp - before.timestamp > max_gap_ms) {
    return std::nullopt;
  }

  Insight ins;
  ins.element = after.element;
  ins.kind = "fall";
  ins.severity = Severity::critical;
  ins.confidence = 1.0;
  ins.detected_at = after.timestamp;
  ins.horizon = Horizon{false, 0};
  ins.evidence = {before.timestamp, after.timestamp};
  ins.explanation = "moving -> laying_in_bed at '" + after.activity.location + "'";
  ins.source_metric = "__activity__";
  ins.id = make_id(ins.element, ins.kind, ins.horizon, ins.detected_at);
  return ins;
}

ReasonOutcome reason(const domain::MedicalHistory& hist,
                     const context::ContextHistory& chist,
                     const std::vector<DetectorConfig>& cfgs) {
  ReasonOutcome out;
  if (chist.empty()) {
    return out;
  }
  const auto& latest = chist.latest();

  std::map<std::string, Insight> by_key;
  auto keep = [&](std::optional<Insight> ins) {
    if (!ins.has_value()) {
      return;
    }
    auto [it, inserted] = by_key.emplace(ins->key(), *ins);
    if (!inserted && ins->severity > it->second.severity) {
      it->second = *ins;
    }
  };

  for (const auto& cfg : cfgs) {
    switch (cfg.type) {
      case DetectorType::threshold:
        keep(detect_threshold(latest, cfg, hist));
        break;
      case DetectorType::trend: {
        // Full history view: the detector keeps the last window_size snapshots
        // that actually contain the metric.
        const auto win = chist.window(chist.size());
        try {
          keep(predict_trend(win, cfg));
        } catch (const Error& e) {
          // Warm-up shortfall is expected on every run start; a degenerate fit
          // points at a misconfigured cadence and is worth surfacing.
          if (e.code() == Errc::degenerate_fit) {
            out.diagnostics.push_back(std::string("trend '") + cfg.kind + "': " + e.what());
          }
        }
        break;
      }
      case DetectorType::fall:
        keep(detect_fall(chist.window(2), cfg.fall_max_gap_ms));
        break;
    }
  }

  out.insights.reserve(by_key.size());
  for (auto& [_, ins] : by_key) {
    out.insights.push_back(std::move(ins));
  }
  std::sort(out.insights.begin(), out.insights.end(), [](const Insight& a, const Insight& b) {
    if (a.severity != b.severity) {
      return a.severity > b.severity;
    }
    if (a.kind != b.kind) {
      return a.kind < b.kind;
    }
    return a.horizon.predicted < b.horizon.predicted;
  });
  return out;
}

}  // namespace careloop::reasoning
