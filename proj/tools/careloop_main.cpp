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

#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "careloop/report.hpp"
#include "careloop/scenario.hpp"
#include "careloop/simulation.hpp"

namespace {

using careloop::Errc;
using careloop::Error;
using careloop::ValidationError;
namespace harness = careloop::harness;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') {
      std::cout << '\n';
    }
    return kExitOk;
  }
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write '" << out_path << "'\n";
    return kExitRuntime;
  }
  out << text;
  return kExitOk;
}

harness::RunReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::parse_error, "cannot open '" + path + "'");
  }
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("invalid report JSON: ") + e.what());
  }
  try {
    return harness::report_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("not a run report: ") + e.what());
  }
}

int cmd_validate(const std::string& path) {
  const auto scenario = harness::load_scenario(path);
  std::cout << "scenario valid: " << scenario.elements.size() << " element(s), "
            << scenario.sensors.size() << " sensor(s), " << scenario.loops.size()
            << " loop(s), duration " << scenario.duration_ms << " ms\n";
  return kExitOk;
}

int cmd_run(const std::string& path, const std::string& format, const std::string& out_path,
            const std::string& log_path, bool follow) {
  const auto scenario = harness::load_scenario(path);

  std::function<void(const harness::NotificationRecord&)> hook;
  if (follow) {
    hook = [](const harness::NotificationRecord& n) {
      std::cout << "[" << n.emitted_at << " ms] " << n.party << " <- " << n.element << " v"
                << n.version << " (" << n.detail << ")\n";
    };
  }

  auto result = harness::run_scenario(scenario, hook);

  if (!log_path.empty()) {
    std::ofstream log_out(log_path);
    if (!log_out) {
      std::cerr << "cannot write '" << log_path << "'\n";
      return kExitRuntime;
    }
    log_out << result.event_log;
  }

  const auto problems = harness::Simulation::verify_report(scenario, result.report);
  if (!problems.empty()) {
    std::cerr << "internal invariant violation:\n";
    for (const auto& p : problems) {
      std::cerr << "  " << p << "\n";
    }
    return kExitRuntime;
  }

  std::string rendered;
  if (format == "json") {
    rendered = harness::to_json(result.report).dump(2);
  } else if (format == "text") {
    rendered = harness::render_text(result.report);
  } else {
    throw Error(Errc::unknown_format, "'" + format + "' (use json or text)");
  }
  return write_or_print(rendered, out_path);
}

int cmd_report(const std::string& path, const std::string& format, const std::string& out_path) {
  const auto report = load_report(path);
  std::string rendered;
  if (format == "json") {
    rendered = harness::to_json(report).dump(2);
  } else if (format == "text") {
    rendered = harness::render_text(report);
  } else {
    throw Error(Errc::unknown_format, "'" + format + "' (use json or text)");
  }
  return write_or_print(rendered, out_path);
}

int cmd_compare(const std::string& path_a, const std::string& path_b) {
  const auto a = load_report(path_a);
  const auto b = load_report(path_b);

  std::cout << "comparing " << path_a << " (A) vs " << path_b << " (B)\n";

  std::cout << "decision latency (mean ms):\n";
  for (const auto& [loop, stats] : a.latency) {
    std::cout << "  A " << loop << ": " << careloop::format_double(stats.mean_ms) << " over "
              << stats.count << "\n";
  }
  for (const auto& [loop, stats] : b.latency) {
    std::cout << "  B " << loop << ": " << careloop::format_double(stats.mean_ms) << " over "
              << stats.count << "\n";
  }

  std::cout << "layer ingress bytes (A vs B):\n";
  std::set<std::string> layers;
  for (const auto& [layer, _] : a.layer_ingress_bytes) layers.insert(layer);
  for (const auto& [layer, _] : b.layer_ingress_bytes) layers.insert(layer);
  for (const auto& layer : layers) {
    const auto av = a.layer_ingress_bytes.count(layer) ? a.layer_ingress_bytes.at(layer) : 0;
    const auto bv = b.layer_ingress_bytes.count(layer) ? b.layer_ingress_bytes.at(layer) : 0;
    std::cout << "  " << layer << ": " << av << " vs " << bv;
    if (av != 0) {
      std::cout << " (B/A = "
                << careloop::format_double(static_cast<double>(bv) / static_cast<double>(av))
                << ")";
    }
    std::cout << "\n";
  }

  std::cout << "insights: " << a.insights.size() << " vs " << b.insights.size()
            << ", actions: " << a.actions.size() << " vs " << b.actions.size()
            << ", notifications: " << a.notifications.size() << " vs " << b.notifications.size()
            << "\n";

  const std::size_t n = std::max(a.aggregates.size(), b.aggregates.size());
  if (n != 0) {
    std::size_t equal = 0;
    const std::size_t common = std::min(a.aggregates.size(), b.aggregates.size());
    for (std::size_t i = 0; i < common; ++i) {
      if (a.aggregates[i].same_value(b.aggregates[i])) {
        ++equal;
      }
    }
    std::cout << "aggregates: " << a.aggregates.size() << " vs " << b.aggregates.size() << ", "
              << equal << "/" << common << " pairwise equal\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"careloop - context-aware healthcare monitoring simulator"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Validate a scenario file");
  validate->add_option("file", validate_path, "scenario JSON")->required();

  std::string run_path;
  std::string run_format = "text";
  std::string run_out;
  std::string run_log;
  bool run_follow = false;
  auto* run = app.add_subcommand("run", "Run a scenario and report the results");
  run->add_option("file", run_path, "scenario JSON")->required();
  run->add_option("--format", run_format, "output format: json or text");
  run->add_option("--out", run_out, "write the report to a file instead of stdout");
  run->add_option("--log", run_log, "write the event log to a file");
  run->add_flag("--follow", run_follow, "stream notifications to stdout as they happen");

  std::string report_path;
  std::string report_format = "text";
  std::string report_out;
  auto* report = app.add_subcommand("report", "Render a saved run report");
  report->add_option("file", report_path, "report JSON")->required();
  report->add_option("--format", report_format, "output format: json or text");
  report->add_option("--out", report_out, "write to a file instead of stdout");

  std::string compare_a;
  std::string compare_b;
  auto* compare = app.add_subcommand("compare", "Diff two run reports");
  compare->add_option("a", compare_a, "first report JSON")->required();
  compare->add_option("b", compare_b, "second report JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      return cmd_validate(validate_path);
    }
    if (run->parsed()) {
      return cmd_run(run_path, run_format, run_out, run_log, run_follow);
    }
    if (report->parsed()) {
      return cmd_report(report_path, report_format, report_out);
    }
    if (compare->parsed()) {
      return cmd_compare(compare_a, compare_b);
    }
  } catch (const ValidationError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    const bool user_error = e.code() == Errc::parse_error || e.code() == Errc::unknown_format ||
                            e.code() == Errc::validation_error;
    std::cerr << e.what() << "\n";
    return user_error ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
