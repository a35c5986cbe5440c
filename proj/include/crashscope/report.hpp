// Copyright 2026 The CrashScope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Natural-language crash reports.
//
// A report has four sections: general information about the app, device and
// context; the reproduction steps as sentences; the screen flow with the
// touched component highlighted; and the stack trace pruned to app frames.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crashscope/domain.hpp"

namespace crashscope {

struct LegendEntry {
  ContextFeature feature = ContextFeature::Network;
  std::string glyph;
  std::string description;
  friend bool operator==(const LegendEntry&, const LegendEntry&) = default;
};

struct ReportGeneral {
  std::string app_name;
  std::string app_version;
  std::string app_package;
  std::string os_version;  // "v1"
  std::string device;      // "sim-1080x1920"
  Orientation orientation = Orientation::Portrait;
  Resolution resolution;
  std::vector<LegendEntry> legend;
  StrategyConfig strategy;
  std::string signature;
  std::string exception_type;
  std::string message;
  friend bool operator==(const ReportGeneral&, const ReportGeneral&) = default;
};

struct ContextBadge {
  ContextFeature feature = ContextFeature::Network;
  ContextValue value = ContextValue::On;
  bool changed = false;  // differs from the previous step
  friend bool operator==(const ContextBadge&, const ContextBadge&) = default;
};

struct ReportStep {
  int index = 0;
  std::string sentence;
  std::vector<ContextBadge> badges;
  bool navigation = false;
  friend bool operator==(const ReportStep&, const ReportStep&) = default;
};

struct FlowImage {
  int index = 0;
  std::string screenshot_ref;
  std::optional<std::string> highlight;  // component id
  std::string svg;
  bool placeholder = false;  // screenshot was missing
  friend bool operator==(const FlowImage&, const FlowImage&) = default;
};

struct ReportDoc {
  std::string crash_id;
  std::string trace_id;
  std::string task_id;
  ReportGeneral general;
  std::vector<ReportStep> steps;
  std::vector<FlowImage> screen_flow;
  StackTrace pruned_trace;
  std::vector<std::string> warnings;
  friend bool operator==(const ReportDoc&, const ReportDoc&) = default;
};

void to_json(Json& j, const ReportDoc& d);
void from_json(const Json& j, ReportDoc& d);

// Returns the SVG for a screenshot ref, or nullopt when it is missing.
using ScreenshotLookup =
    std::function<std::optional<std::string>(const std::string& ref)>;

// The sentence for one step. Pointer steps need the recorded target label.
std::string describeStep(const ExecutionStep& step);

// Throws ContractViolation unless the trace crashed and matches the record.
ReportDoc generateReport(const CrashRecord& crash, const ExecutionTrace& trace,
                         const ScreenshotLookup& screenshots);

// Self-contained HTML. Byte-identical for equal documents.
std::string renderHtml(const ReportDoc& doc);

// Display string for a context value, e.g. "(91.0, 181.0)" for an
// infeasible GPS fix.
std::string describeContextValue(ContextFeature f, ContextValue v);

}  // namespace crashscope
