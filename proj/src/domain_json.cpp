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

#include "crashscope/domain.hpp"

#include <algorithm>
#include <cctype>

namespace crashscope {
namespace {

template <typename E>
E enumAt(const Json& j, const char* key) {
  return enumFromString<E>(j.at(key).get<std::string>(), key);
}

template <typename T>
void optionalTo(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void optionalFrom(const Json& j, const char* key, std::optional<T>& v) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    v.reset();
  } else {
    v = it->template get<T>();
  }
}

template <typename E>
void optionalEnumFrom(const Json& j, const char* key, std::optional<E>& v) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    v.reset();
  } else {
    v = enumFromString<E>(it->template get<std::string>(), key);
  }
}

}  // namespace

void to_json(Json& j, const Point& v) { j = Json{{"x", v.x}, {"y", v.y}}; }
void from_json(const Json& j, Point& v) {
  v.x = j.at("x").get<int>();
  v.y = j.at("y").get<int>();
}

void to_json(Json& j, const Bounds& v) {
  j = Json{{"left", v.left},
           {"top", v.top},
           {"right", v.right},
           {"bottom", v.bottom}};
}
void from_json(const Json& j, Bounds& v) {
  v.left = j.at("left").get<int>();
  v.top = j.at("top").get<int>();
  v.right = j.at("right").get<int>();
  v.bottom = j.at("bottom").get<int>();
}

void to_json(Json& j, const Resolution& v) {
  j = Json{{"width", v.width}, {"height", v.height}};
}
void from_json(const Json& j, Resolution& v) {
  v.width = j.at("width").get<int>();
  v.height = j.at("height").get<int>();
}

void to_json(Json& j, const GuiComponent& v) {
  j = Json{{"id", v.id},
           {"kind", v.kind},
           {"label", v.label},
           {"bounds", v.bounds},
           {"clickable", v.clickable},
           {"long_clickable", v.long_clickable}};
  optionalTo(j, "keyboard_type", v.keyboard_type);
}
void from_json(const Json& j, GuiComponent& v) {
  v.id = j.at("id").get<std::string>();
  v.kind = enumAt<ComponentKind>(j, "kind");
  v.label = j.value("label", std::string());
  v.bounds = j.at("bounds").get<Bounds>();
  v.clickable = j.value("clickable", false);
  v.long_clickable = j.value("long_clickable", false);
  optionalEnumFrom(j, "keyboard_type", v.keyboard_type);
}

void to_json(Json& j, const ScreenState& v) {
  j = Json{{"activity", v.activity},
           {"components", v.components},
           {"orientation", v.orientation},
           {"state_key", v.state_key}};
}
void from_json(const Json& j, ScreenState& v) {
  v.activity = j.at("activity").get<std::string>();
  v.components = j.at("components").get<std::vector<GuiComponent>>();
  v.orientation = enumAt<Orientation>(j, "orientation");
  v.state_key = j.at("state_key").get<std::string>();
}

void to_json(Json& j, const ContextState& v) {
  j = Json::object();
  for (auto f : kAllFeatures) {
    std::string key(toString(f));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    j[key] = v.get(f);
  }
}
void from_json(const Json& j, ContextState& v) {
  v = ContextState();
  for (auto f : kAllFeatures) {
    std::string key(toString(f));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (j.contains(key)) v.set(f, enumAt<ContextValue>(j, key.c_str()));
  }
}

void to_json(Json& j, const UiEvent& v) {
  j = Json{{"action", v.action}};
  optionalTo(j, "target", v.target);
  optionalTo(j, "coordinates", v.coordinates);
  optionalTo(j, "text", v.text);
  optionalTo(j, "context_feature", v.context_feature);
  optionalTo(j, "context_value", v.context_value);
}
void from_json(const Json& j, UiEvent& v) {
  v.action = enumAt<Action>(j, "action");
  optionalFrom(j, "target", v.target);
  optionalFrom(j, "coordinates", v.coordinates);
  optionalFrom(j, "text", v.text);
  optionalEnumFrom(j, "context_feature", v.context_feature);
  optionalEnumFrom(j, "context_value", v.context_value);
  v.validate();
}

void to_json(Json& j, const StackFrame& v) {
  j = Json{{"package", v.package},
           {"class", v.class_name},
           {"method", v.method},
           {"file", v.file},
           {"line", v.line}};
}
void from_json(const Json& j, StackFrame& v) {
  v.package = j.at("package").get<std::string>();
  v.class_name = j.at("class").get<std::string>();
  v.method = j.at("method").get<std::string>();
  v.file = j.at("file").get<std::string>();
  v.line = j.at("line").get<int>();
}

void to_json(Json& j, const StackTrace& v) {
  j = Json{{"exception_type", v.exception_type},
           {"message", v.message},
           {"frames", v.frames}};
  if (!v.raw_noise.empty()) j["raw_noise"] = v.raw_noise;
}
void from_json(const Json& j, StackTrace& v) {
  v.exception_type = j.at("exception_type").get<std::string>();
  v.message = j.value("message", std::string());
  v.frames = j.at("frames").get<std::vector<StackFrame>>();
  v.raw_noise = j.value("raw_noise", std::vector<std::string>());
}

void to_json(Json& j, const StrategyConfig& v) {
  j = Json{{"traversal", v.traversal},
           {"text_mode", v.text_mode},
           {"context_mode", v.context_mode},
           {"seed", v.seed}};
}
void from_json(const Json& j, StrategyConfig& v) {
  v.traversal = enumAt<Traversal>(j, "traversal");
  v.text_mode = enumAt<TextMode>(j, "text_mode");
  v.context_mode = enumAt<ContextMode>(j, "context_mode");
  v.seed = j.value("seed", std::uint64_t{0});
}

void to_json(Json& j, const ExecutionStep& v) {
  j = Json{{"index", v.index},
           {"event", v.event},
           {"screen_before", v.screen_before},
           {"screen_after", v.screen_after},
           {"screenshot_ref", v.screenshot_ref},
           {"context", v.context},
           {"result", v.result},
           {"navigation", v.navigation}};
  optionalTo(j, "target_label", v.target_label);
  optionalTo(j, "target_bounds", v.target_bounds);
}
void from_json(const Json& j, ExecutionStep& v) {
  v.index = j.at("index").get<int>();
  v.event = j.at("event").get<UiEvent>();
  v.screen_before = j.at("screen_before").get<std::string>();
  v.screen_after = j.at("screen_after").get<std::string>();
  v.screenshot_ref = j.value("screenshot_ref", std::string());
  v.context = j.at("context").get<ContextState>();
  v.result = enumAt<EventResult>(j, "result");
  v.navigation = j.value("navigation", false);
  optionalFrom(j, "target_label", v.target_label);
  optionalFrom(j, "target_bounds", v.target_bounds);
}

void to_json(Json& j, const ExecutionTrace& v) {
  j = Json{{"trace_id", v.trace_id},
           {"task_id", v.task_id},
           {"app_id", v.app_id},
           {"app_name", v.app_name},
           {"app_version", v.app_version},
           {"strategy", v.strategy},
           {"steps", v.steps},
           {"outcome", v.outcome},
           {"warnings", v.warnings},
           {"diagnostics", v.diagnostics}};
}
void from_json(const Json& j, ExecutionTrace& v) {
  v.trace_id = j.at("trace_id").get<std::string>();
  v.task_id = j.value("task_id", std::string());
  v.app_id = j.at("app_id").get<std::string>();
  v.app_name = j.value("app_name", std::string());
  v.app_version = j.value("app_version", std::string());
  v.strategy = j.at("strategy").get<StrategyConfig>();
  v.steps = j.at("steps").get<std::vector<ExecutionStep>>();
  v.outcome = enumAt<TraceOutcome>(j, "outcome");
  v.warnings = j.value("warnings", std::vector<StackTrace>());
  v.diagnostics = j.value("diagnostics", std::vector<std::string>());
}

void to_json(Json& j, const CrashRecord& v) {
  j = Json{{"crash_id", v.crash_id},
           {"trace_id", v.trace_id},
           {"task_id", v.task_id},
           {"crash_step_index", v.crash_step_index},
           {"stack_trace", v.stack_trace},
           {"signature", v.signature},
           {"frameless", v.frameless},
           {"dialog_only", v.dialog_only},
           {"context_at_crash", v.context_at_crash},
           {"orientation", v.orientation},
           {"resolution", v.resolution},
           {"app_package", v.app_package},
           {"device", v.device},
           {"screenshot_ref", v.screenshot_ref},
           {"strategy", v.strategy}};
}
void from_json(const Json& j, CrashRecord& v) {
  v.crash_id = j.at("crash_id").get<std::string>();
  v.trace_id = j.at("trace_id").get<std::string>();
  v.task_id = j.value("task_id", std::string());
  v.crash_step_index = j.at("crash_step_index").get<int>();
  v.stack_trace = j.at("stack_trace").get<StackTrace>();
  v.signature = j.at("signature").get<std::string>();
  v.frameless = j.value("frameless", false);
  v.dialog_only = j.value("dialog_only", false);
  v.context_at_crash = j.at("context_at_crash").get<ContextState>();
  v.orientation = enumAt<Orientation>(j, "orientation");
  v.resolution = j.at("resolution").get<Resolution>();
  v.app_package = j.at("app_package").get<std::string>();
  v.device = j.value("device", std::string());
  v.screenshot_ref = j.value("screenshot_ref", std::string());
  v.strategy = j.at("strategy").get<StrategyConfig>();
}

}  // namespace crashscope
