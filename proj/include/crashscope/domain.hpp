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

// Vocabulary types shared by every module: GUI hierarchy snapshots, events,
// contextual state, stack traces, execution traces and crash records.
// Everything here is a plain value type with a canonical JSON form.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace crashscope {

using Json = nlohmann::json;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A document failed validation; path names the offending field, e.g.
// "transitions[0].to".
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message)
      : Error((path.empty() ? "(root)" : path) + ": " + message),
        path_(std::move(path)),
        message_(message) {}
  const std::string& path() const { return path_; }
  // The message without the path prefix.
  const std::string& message() const { return message_; }

 private:
  std::string path_;
  std::string message_;
};

// ---------------------------------------------------------------------------
// Geometry

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Bounds {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  bool valid() const {
    return left >= 0 && top >= 0 && left <= right && top <= bottom;
  }
  // Inclusive on every edge.
  bool contains(Point p) const {
    return p.x >= left && p.x <= right && p.y >= top && p.y <= bottom;
  }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct Resolution {
  int width = 0;
  int height = 0;
  std::string str() const;  // "1080x1920"
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

// Midpoint with floor division. Throws ContractViolation on invalid bounds.
Point componentCenter(const Bounds& bounds);

// ---------------------------------------------------------------------------
// GUI hierarchy

enum class ComponentKind { Button, TextField, Label, Other };
enum class KeyboardType { Text, Number, Phone, Email };
enum class Orientation { Portrait, Landscape };

struct GuiComponent {
  std::string id;
  ComponentKind kind = ComponentKind::Other;
  std::string label;
  Bounds bounds;
  bool clickable = false;
  bool long_clickable = false;
  std::optional<KeyboardType> keyboard_type;  // iff kind == TextField

  friend bool operator==(const GuiComponent&, const GuiComponent&) = default;
};

struct ScreenState {
  std::string activity;
  std::vector<GuiComponent> components;  // hierarchy pre-order
  Orientation orientation = Orientation::Portrait;
  std::string state_key;

  const GuiComponent* find(std::string_view component_id) const;
  friend bool operator==(const ScreenState&, const ScreenState&) = default;
};

// Fingerprint over (activity, sorted component ids, orientation).
std::string stateKey(std::string_view activity,
                     const std::vector<GuiComponent>& components,
                     Orientation orientation);

ScreenState makeScreenState(std::string activity,
                            std::vector<GuiComponent> components,
                            Orientation orientation);

// ---------------------------------------------------------------------------
// Context

enum class ContextFeature {
  Network,
  Gps,
  Accelerometer,
  Magnetometer,
  Temperature,
  Rotation
};
inline constexpr std::array<ContextFeature, 6> kAllFeatures = {
    ContextFeature::Network,      ContextFeature::Gps,
    ContextFeature::Accelerometer, ContextFeature::Magnetometer,
    ContextFeature::Temperature,  ContextFeature::Rotation};

enum class ContextValue { On, Off, Normal, Infeasible, Portrait, Landscape };

bool isSensor(ContextFeature f);
bool valueAllowed(ContextFeature f, ContextValue v);
ContextValue defaultValue(ContextFeature f);
// NETWORK -> OFF, sensors -> INFEASIBLE. ROTATION has no adverse value here;
// it is exercised by double rotation instead.
ContextValue adverseValue(ContextFeature f);
ContextValue toContextValue(Orientation o);

// Total map over all six features.
class ContextState {
 public:
  ContextState();

  ContextValue get(ContextFeature f) const;
  // Throws ContractViolation if the value is not in the feature's domain.
  void set(ContextFeature f, ContextValue v);
  Orientation orientation() const;

  friend bool operator==(const ContextState&, const ContextState&) = default;

 private:
  std::array<ContextValue, 6> values_;
};

// ---------------------------------------------------------------------------
// Events

enum class Action { Tap, LongTap, Type, Rotate, ContextSet, Launch, Back };

struct UiEvent {
  Action action = Action::Launch;
  std::optional<std::string> target;
  std::optional<Point> coordinates;
  std::optional<std::string> text;
  std::optional<ContextFeature> context_feature;
  std::optional<ContextValue> context_value;

  static UiEvent tap(std::string target, Point at);
  static UiEvent longTap(std::string target, Point at);
  static UiEvent type(std::string target, Point at, std::string text);
  static UiEvent rotate();
  static UiEvent contextSet(ContextFeature f, ContextValue v);
  static UiEvent launch();
  static UiEvent back();

  bool isPointer() const {
    return action == Action::Tap || action == Action::LongTap ||
           action == Action::Type;
  }
  // Throws ContractViolation when the payload does not fit the action.
  void validate() const;

  friend bool operator==(const UiEvent&, const UiEvent&) = default;
};

// ---------------------------------------------------------------------------
// Stack traces

struct StackFrame {
  std::string package;
  std::string class_name;
  std::string method;
  std::string file;
  int line = 0;

  // "pkg.Class.method(File:Line)"
  std::string str() const;
  friend bool operator==(const StackFrame&, const StackFrame&) = default;
};

struct StackTrace {
  std::string exception_type;
  std::string message;
  std::vector<StackFrame> frames;
  std::vector<std::string> raw_noise;

  friend bool operator==(const StackTrace&, const StackTrace&) = default;
};

// Wire form: "Type: message" then "  at pkg.Class.method(File:Line)" per line.
std::string formatStackTrace(const StackTrace& trace);
StackTrace parseStackTrace(std::string_view text);
// One frame without the leading "at ": "pkg.Class.method(File:Line)".
StackFrame parseStackFrame(std::string_view text);

// Removes pid tokens, timestamps, hex addresses and identity hashes from the
// message and every frame string; clears raw_noise. Idempotent.
StackTrace normalizeStackTrace(const StackTrace& raw);
std::string stripNoise(std::string_view text);

// True when package is app_package or nested under it.
bool inAppPackage(std::string_view package, std::string_view app_package);

struct CrashSignature {
  std::string value;
  bool frameless = false;
  friend bool operator==(const CrashSignature&, const CrashSignature&) = default;
};

// Hash over exception type, message and the app-package frames of the
// normalized trace.
CrashSignature crashSignature(const StackTrace& trace,
                              std::string_view app_package);

// Frames outside app_package removed; noise stripped.
StackTrace pruneToApp(const StackTrace& trace, std::string_view app_package);

// ---------------------------------------------------------------------------
// Strategies

enum class Traversal { TopDown, BottomUp };
enum class TextMode { None, Expected, Unexpected };
enum class ContextMode { Normal, Adverse };

struct StrategyConfig {
  Traversal traversal = Traversal::TopDown;
  TextMode text_mode = TextMode::None;
  ContextMode context_mode = ContextMode::Normal;
  std::uint64_t seed = 0;

  // "TOP_DOWN,EXPECTED,ADVERSE" (seed not included)
  std::string name() const;
  // "TD-E-AC", used inside document ids
  std::string code() const;
  bool sameCell(const StrategyConfig& o) const {
    return traversal == o.traversal && text_mode == o.text_mode &&
           context_mode == o.context_mode;
  }
  friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;
};

// Parses "TOP_DOWN,EXPECTED,ADVERSE". Throws ContractViolation.
StrategyConfig parseStrategy(std::string_view text);

// All 12 cells, traversal-major, seed 0.
std::vector<StrategyConfig> strategyMatrix();

// ---------------------------------------------------------------------------
// Traces and crashes

// Sentinel recorded as screen_after of a step that crashed the app.
inline constexpr std::string_view kCrashedStateKey = "crash-dialog";

enum class EventResult { Ok, NoEffect, Crashed };

struct ExecutionStep {
  int index = 0;  // 1-based
  UiEvent event;
  std::string screen_before;
  std::string screen_after;
  std::string screenshot_ref;
  ContextState context;  // context in effect once the event has executed
  EventResult result = EventResult::Ok;
  std::optional<std::string> target_label;
  std::optional<Bounds> target_bounds;
  bool navigation = false;  // replayed by navigateTo, not exploration

  friend bool operator==(const ExecutionStep&, const ExecutionStep&) = default;
};

enum class TraceOutcome { Completed, Crashed, BudgetExhausted };

struct ExecutionTrace {
  std::string trace_id;
  std::string task_id;
  std::string app_id;
  std::string app_name;
  std::string app_version;
  StrategyConfig strategy;
  std::vector<ExecutionStep> steps;
  TraceOutcome outcome = TraceOutcome::Completed;
  std::vector<StackTrace> warnings;  // uncaught exceptions without a dialog
  std::vector<std::string> diagnostics;

  friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

struct CrashRecord {
  std::string crash_id;
  std::string trace_id;
  std::string task_id;
  int crash_step_index = 0;
  StackTrace stack_trace;  // normalized, not pruned
  std::string signature;
  bool frameless = false;
  bool dialog_only = false;
  ContextState context_at_crash;
  Orientation orientation = Orientation::Portrait;
  Resolution resolution;
  std::string app_package;
  std::string device;  // port identification, e.g. "sim-1080x1920/v1"
  std::string screenshot_ref;
  StrategyConfig strategy;

  friend bool operator==(const CrashRecord&, const CrashRecord&) = default;
};

// ---------------------------------------------------------------------------
// Enum spelling, shared with the JSON layer and the CLI.

std::string_view toString(ComponentKind v);
std::string_view toString(KeyboardType v);
std::string_view toString(Orientation v);
std::string_view toString(Action v);
std::string_view toString(ContextFeature v);
std::string_view toString(ContextValue v);
std::string_view toString(Traversal v);
std::string_view toString(TextMode v);
std::string_view toString(ContextMode v);
std::string_view toString(EventResult v);
std::string_view toString(TraceOutcome v);

// ---------------------------------------------------------------------------
// JSON

void to_json(Json& j, const Point& v);
void from_json(const Json& j, Point& v);
void to_json(Json& j, const Bounds& v);
void from_json(const Json& j, Bounds& v);
void to_json(Json& j, const Resolution& v);
void from_json(const Json& j, Resolution& v);
void to_json(Json& j, const GuiComponent& v);
void from_json(const Json& j, GuiComponent& v);
void to_json(Json& j, const ScreenState& v);
void from_json(const Json& j, ScreenState& v);
void to_json(Json& j, const ContextState& v);
void from_json(const Json& j, ContextState& v);
void to_json(Json& j, const UiEvent& v);
void from_json(const Json& j, UiEvent& v);
void to_json(Json& j, const StackFrame& v);
void from_json(const Json& j, StackFrame& v);
void to_json(Json& j, const StackTrace& v);
void from_json(const Json& j, StackTrace& v);
void to_json(Json& j, const StrategyConfig& v);
void from_json(const Json& j, StrategyConfig& v);
void to_json(Json& j, const ExecutionStep& v);
void from_json(const Json& j, ExecutionStep& v);
void to_json(Json& j, const ExecutionTrace& v);
void from_json(const Json& j, ExecutionTrace& v);
void to_json(Json& j, const CrashRecord& v);
void from_json(const Json& j, CrashRecord& v);

NLOHMANN_JSON_SERIALIZE_ENUM(ComponentKind,
                             {{ComponentKind::Button, "BUTTON"},
                              {ComponentKind::TextField, "TEXT_FIELD"},
                              {ComponentKind::Label, "LABEL"},
                              {ComponentKind::Other, "OTHER"}})
NLOHMANN_JSON_SERIALIZE_ENUM(KeyboardType, {{KeyboardType::Text, "TEXT"},
                                            {KeyboardType::Number, "NUMBER"},
                                            {KeyboardType::Phone, "PHONE"},
                                            {KeyboardType::Email, "EMAIL"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Orientation,
                             {{Orientation::Portrait, "PORTRAIT"},
                              {Orientation::Landscape, "LANDSCAPE"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Action, {{Action::Tap, "TAP"},
                                      {Action::LongTap, "LONG_TAP"},
                                      {Action::Type, "TYPE"},
                                      {Action::Rotate, "ROTATE"},
                                      {Action::ContextSet, "CONTEXT_SET"},
                                      {Action::Launch, "LAUNCH"},
                                      {Action::Back, "BACK"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ContextFeature,
                             {{ContextFeature::Network, "NETWORK"},
                              {ContextFeature::Gps, "GPS"},
                              {ContextFeature::Accelerometer, "ACCELEROMETER"},
                              {ContextFeature::Magnetometer, "MAGNETOMETER"},
                              {ContextFeature::Temperature, "TEMPERATURE"},
                              {ContextFeature::Rotation, "ROTATION"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ContextValue,
                             {{ContextValue::On, "ON"},
                              {ContextValue::Off, "OFF"},
                              {ContextValue::Normal, "NORMAL"},
                              {ContextValue::Infeasible, "INFEASIBLE"},
                              {ContextValue::Portrait, "PORTRAIT"},
                              {ContextValue::Landscape, "LANDSCAPE"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Traversal, {{Traversal::TopDown, "TOP_DOWN"},
                                         {Traversal::BottomUp, "BOTTOM_UP"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TextMode, {{TextMode::None, "NONE"},
                                        {TextMode::Expected, "EXPECTED"},
                                        {TextMode::Unexpected, "UNEXPECTED"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ContextMode, {{ContextMode::Normal, "NORMAL"},
                                           {ContextMode::Adverse, "ADVERSE"}})
NLOHMANN_JSON_SERIALIZE_ENUM(EventResult, {{EventResult::Ok, "OK"},
                                           {EventResult::NoEffect, "NO_EFFECT"},
                                           {EventResult::Crashed, "CRASHED"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TraceOutcome,
                             {{TraceOutcome::Completed, "COMPLETED"},
                              {TraceOutcome::Crashed, "CRASHED"},
                              {TraceOutcome::BudgetExhausted,
                               "BUDGET_EXHAUSTED"}})

// Strict enum parsing from a string; throws ContractViolation naming `what`.
template <typename E>
E enumFromString(std::string_view text, std::string_view what) {
  Json j = std::string(text);
  // nlohmann maps unknown strings to the first enumerator; check the round
  // trip instead.
  E value = j.get<E>();
  if (Json(value).get<std::string>() != text) {
    throw ContractViolation("unknown " + std::string(what) + " '" +
                            std::string(text) + "'");
  }
  return value;
}

}  // namespace crashscope
