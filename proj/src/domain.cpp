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
#include <charconv>
#include <regex>

#include "crashscope/hash.hpp"

namespace crashscope {

std::string Resolution::str() const {
  return std::to_string(width) + "x" + std::to_string(height);
}

Point componentCenter(const Bounds& b) {
  if (!b.valid()) {
    throw ContractViolation("componentCenter: invalid bounds (" +
                            std::to_string(b.left) + "," +
                            std::to_string(b.top) + "," +
                            std::to_string(b.right) + "," +
                            std::to_string(b.bottom) + ")");
  }
  // Non-negative operands, so integer division is floor.
  return Point{(b.left + b.right) / 2, (b.top + b.bottom) / 2};
}

const GuiComponent* ScreenState::find(std::string_view component_id) const {
  for (const auto& c : components) {
    if (c.id == component_id) return &c;
  }
  return nullptr;
}

std::string stateKey(std::string_view activity,
                     const std::vector<GuiComponent>& components,
                     Orientation orientation) {
  std::vector<std::string_view> ids;
  ids.reserve(components.size());
  for (const auto& c : components) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());

  Fnv1a128 h;
  h.field(activity);
  for (auto id : ids) h.field(id);
  h.field(toString(orientation));
  // 64 bits of the digest are plenty for a per-app state space and keep
  // ids readable.
  return h.digest().hex().substr(0, 16);
}

ScreenState makeScreenState(std::string activity,
                            std::vector<GuiComponent> components,
                            Orientation orientation) {
  ScreenState s;
  s.state_key = stateKey(activity, components, orientation);
  s.activity = std::move(activity);
  s.components = std::move(components);
  s.orientation = orientation;
  return s;
}

// ---------------------------------------------------------------------------

bool isSensor(ContextFeature f) {
  return f == ContextFeature::Gps || f == ContextFeature::Accelerometer ||
         f == ContextFeature::Magnetometer || f == ContextFeature::Temperature;
}

bool valueAllowed(ContextFeature f, ContextValue v) {
  switch (f) {
    case ContextFeature::Network:
      return v == ContextValue::On || v == ContextValue::Off;
    case ContextFeature::Rotation:
      return v == ContextValue::Portrait || v == ContextValue::Landscape;
    default:
      return v == ContextValue::Normal || v == ContextValue::Infeasible;
  }
}

ContextValue defaultValue(ContextFeature f) {
  switch (f) {
    case ContextFeature::Network:
      return ContextValue::On;
    case ContextFeature::Rotation:
      return ContextValue::Portrait;
    default:
      return ContextValue::Normal;
  }
}

ContextValue adverseValue(ContextFeature f) {
  switch (f) {
    case ContextFeature::Network:
      return ContextValue::Off;
    case ContextFeature::Rotation:
      return ContextValue::Landscape;
    default:
      return ContextValue::Infeasible;
  }
}

ContextValue toContextValue(Orientation o) {
  return o == Orientation::Portrait ? ContextValue::Portrait
                                    : ContextValue::Landscape;
}

ContextState::ContextState() {
  for (auto f : kAllFeatures) values_[static_cast<int>(f)] = defaultValue(f);
}

ContextValue ContextState::get(ContextFeature f) const {
  return values_[static_cast<int>(f)];
}

void ContextState::set(ContextFeature f, ContextValue v) {
  if (!valueAllowed(f, v)) {
    throw ContractViolation("context value " + std::string(toString(v)) +
                            " not allowed for " + std::string(toString(f)));
  }
  values_[static_cast<int>(f)] = v;
}

Orientation ContextState::orientation() const {
  return get(ContextFeature::Rotation) == ContextValue::Landscape
             ? Orientation::Landscape
             : Orientation::Portrait;
}

// ---------------------------------------------------------------------------

UiEvent UiEvent::tap(std::string target, Point at) {
  UiEvent e;
  e.action = Action::Tap;
  e.target = std::move(target);
  e.coordinates = at;
  return e;
}

UiEvent UiEvent::longTap(std::string target, Point at) {
  UiEvent e = tap(std::move(target), at);
  e.action = Action::LongTap;
  return e;
}

UiEvent UiEvent::type(std::string target, Point at, std::string text) {
  UiEvent e = tap(std::move(target), at);
  e.action = Action::Type;
  e.text = std::move(text);
  return e;
}

UiEvent UiEvent::rotate() {
  UiEvent e;
  e.action = Action::Rotate;
  return e;
}

UiEvent UiEvent::contextSet(ContextFeature f, ContextValue v) {
  UiEvent e;
  e.action = Action::ContextSet;
  e.context_feature = f;
  e.context_value = v;
  return e;
}

UiEvent UiEvent::launch() { return UiEvent{}; }

UiEvent UiEvent::back() {
  UiEvent e;
  e.action = Action::Back;
  return e;
}

void UiEvent::validate() const {
  auto fail = [this](const char* why) {
    throw ContractViolation(std::string(toString(action)) + " event: " + why);
  };
  const bool pointer = isPointer();
  if (pointer && (!target || !coordinates)) fail("needs target and coordinates");
  if (!pointer && (target || coordinates)) fail("must not carry a target");
  if ((action == Action::Type) != text.has_value()) {
    fail(action == Action::Type ? "needs text" : "must not carry text");
  }
  const bool ctx = action == Action::ContextSet;
  if (ctx != (context_feature.has_value() && context_value.has_value())) {
    fail(ctx ? "needs feature and value" : "must not carry context");
  }
  if (!ctx && (context_feature || context_value)) fail("must not carry context");
  if (ctx) {
    if (*context_feature == ContextFeature::Rotation) {
      fail("rotation is changed with ROTATE");
    }
    if (!valueAllowed(*context_feature, *context_value)) fail("bad value");
  }
}

// ---------------------------------------------------------------------------

std::string StackFrame::str() const {
  std::string out;
  if (!package.empty()) out += package + ".";
  out += class_name + "." + method + "(" + file + ":" + std::to_string(line) +
         ")";
  return out;
}

std::string formatStackTrace(const StackTrace& trace) {
  std::string out = trace.exception_type;
  if (!trace.message.empty()) out += ": " + trace.message;
  out += "\n";
  for (const auto& f : trace.frames) out += "  at " + f.str() + "\n";
  return out;
}

namespace {

StackFrame parseFrame(std::string_view s, int line_no) {
  auto bad = [&](const char* why) {
    return ContractViolation("stack trace line " + std::to_string(line_no) +
                             ": " + why);
  };
  auto open = s.rfind('(');
  if (open == std::string_view::npos || s.back() != ')') {
    throw bad("expected 'pkg.Class.method(File:Line)'");
  }
  auto location = s.substr(open + 1, s.size() - open - 2);
  auto qualified = s.substr(0, open);
  auto colon = location.rfind(':');
  if (colon == std::string_view::npos) throw bad("missing ':' in location");
  StackFrame f;
  f.file = std::string(location.substr(0, colon));
  auto num = location.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), f.line);
  if (ec != std::errc() || ptr != num.data() + num.size()) {
    throw bad("line number is not an integer");
  }
  auto method_dot = qualified.rfind('.');
  if (method_dot == std::string_view::npos) throw bad("missing method");
  f.method = std::string(qualified.substr(method_dot + 1));
  auto owner = qualified.substr(0, method_dot);
  auto class_dot = owner.rfind('.');
  if (class_dot == std::string_view::npos) {
    f.class_name = std::string(owner);
  } else {
    f.package = std::string(owner.substr(0, class_dot));
    f.class_name = std::string(owner.substr(class_dot + 1));
  }
  if (f.method.empty() || f.class_name.empty()) throw bad("empty class/method");
  return f;
}

}  // namespace

StackFrame parseStackFrame(std::string_view text) {
  return parseFrame(text, 1);
}

StackTrace parseStackTrace(std::string_view text) {
  StackTrace t;
  int line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line_no == 1) {
      auto sep = line.find(": ");
      if (sep == std::string_view::npos) {
        t.exception_type = std::string(line);
      } else {
        t.exception_type = std::string(line.substr(0, sep));
        t.message = std::string(line.substr(sep + 2));
      }
      continue;
    }
    auto body = line.substr(line.find_first_not_of(' '));
    if (body.rfind("at ", 0) != 0) {
      throw ContractViolation("stack trace line " + std::to_string(line_no) +
                              ": expected '  at ...'");
    }
    t.frames.push_back(parseFrame(body.substr(3), line_no));
  }
  if (t.exception_type.empty()) throw ContractViolation("empty stack trace");
  if (t.frames.empty()) throw ContractViolation("stack trace has no frames");
  return t;
}

std::string stripNoise(std::string_view text) {
  // Order matters: "(pid N)" before bare numbers, timestamps before epochs.
  static const std::array<std::regex, 6> kPatterns = {
      std::regex(R"(\s*\(pid\s+\d+\))"),
      std::regex(R"(\s*\bpid=\d+)"),
      std::regex(
          R"(\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:?\d{2})?)"),
      std::regex(R"(\b\d{10}(\d{3})?\b)"),
      std::regex(R"((\s+at)?\s*0[xX][0-9a-fA-F]+)"),
      std::regex(R"(@[0-9a-fA-F]+)"),
  };
  static const std::regex kSpaces(R"(\s+)");

  std::string current(text);
  for (;;) {
    std::string next = current;
    for (const auto& re : kPatterns) next = std::regex_replace(next, re, "");
    next = std::regex_replace(next, kSpaces, " ");
    auto first = next.find_first_not_of(' ');
    auto last = next.find_last_not_of(' ');
    next = first == std::string::npos ? std::string()
                                      : next.substr(first, last - first + 1);
    if (next == current) return next;
    current = std::move(next);
  }
}

StackTrace normalizeStackTrace(const StackTrace& raw) {
  StackTrace out;
  out.exception_type = stripNoise(raw.exception_type);
  out.message = stripNoise(raw.message);
  out.frames.reserve(raw.frames.size());
  for (const auto& f : raw.frames) {
    out.frames.push_back(StackFrame{stripNoise(f.package),
                                    stripNoise(f.class_name),
                                    stripNoise(f.method), stripNoise(f.file),
                                    f.line});
  }
  return out;
}

bool inAppPackage(std::string_view package, std::string_view app_package) {
  if (app_package.empty()) return false;
  if (package.size() < app_package.size()) return false;
  if (package.substr(0, app_package.size()) != app_package) return false;
  return package.size() == app_package.size() ||
         package[app_package.size()] == '.';
}

StackTrace pruneToApp(const StackTrace& trace, std::string_view app_package) {
  StackTrace out = normalizeStackTrace(trace);
  std::erase_if(out.frames, [&](const StackFrame& f) {
    return !inAppPackage(f.package, app_package);
  });
  return out;
}

CrashSignature crashSignature(const StackTrace& trace,
                              std::string_view app_package) {
  StackTrace pruned = pruneToApp(trace, app_package);
  Fnv1a128 h;
  h.field(pruned.exception_type);
  h.field(pruned.message);
  for (const auto& f : pruned.frames) h.field(f.str());
  return CrashSignature{h.digest().hex(), pruned.frames.empty()};
}

// ---------------------------------------------------------------------------

std::string StrategyConfig::name() const {
  return std::string(toString(traversal)) + "," +
         std::string(toString(text_mode)) + "," +
         std::string(toString(context_mode));
}

std::string StrategyConfig::code() const {
  std::string out = traversal == Traversal::TopDown ? "TD" : "BU";
  out += text_mode == TextMode::None       ? "-N"
         : text_mode == TextMode::Expected ? "-E"
                                           : "-U";
  out += context_mode == ContextMode::Normal ? "-NC" : "-AC";
  return out;
}

StrategyConfig parseStrategy(std::string_view text) {
  std::vector<std::string_view> parts;
  while (true) {
    auto comma = text.find(',');
    parts.push_back(text.substr(0, comma));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  if (parts.size() != 3) {
    throw ContractViolation(
        "strategy must be TRAVERSAL,TEXT,CONTEXT e.g. TOP_DOWN,NONE,NORMAL");
  }
  StrategyConfig s;
  s.traversal = enumFromString<Traversal>(parts[0], "traversal");
  s.text_mode = enumFromString<TextMode>(parts[1], "text mode");
  s.context_mode = enumFromString<ContextMode>(parts[2], "context mode");
  return s;
}

std::vector<StrategyConfig> strategyMatrix() {
  std::vector<StrategyConfig> out;
  for (auto t : {Traversal::TopDown, Traversal::BottomUp}) {
    for (auto x : {TextMode::None, TextMode::Expected, TextMode::Unexpected}) {
      for (auto c : {ContextMode::Normal, ContextMode::Adverse}) {
        out.push_back(StrategyConfig{t, x, c, 0});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view toString(ComponentKind v) {
  static constexpr std::string_view kNames[] = {"BUTTON", "TEXT_FIELD", "LABEL", "OTHER"};
  return kNames[static_cast<int>(v)];
}

std::string_view toString(KeyboardType v) {
  static constexpr std::string_view kNames[] = {"TEXT", "NUMBER", "PHONE", "EMAIL"};
  return kNames[static_cast<int>(v)];
}

std::string_view toString(Orientation v) {
  static constexpr std::string_view kNames[] = {"PORTRAIT", "LANDSCAPE"};
  return kNames[static_cast<int>(v)];
}

std::string_view toString(Action v) {
  static constexpr std::string_view kNames[] = {"TAP", "LONG_TAP", "TYPE", "ROTATE", "CONTEXT_SET", "LAUNCH", "BACK"};
  return kNames[static_cast<int>(v)];
}

std::string_view toString(ContextFeature v) {
  static constexpr std::string_view kNames[] = {"NETWORK", "GPS", "ACCELEROMETER", "MAGNETOMETER", "TEMPERATURE", "ROTATION"};
  return kNames[static_cast<int>(v)];
}

std::string_view toString(ContextValue v) {
  static constexpr std::string_view kNames[] = {"ON", "OFF", "NORMAL", "INFEASIBLE", "PORTRAIT", "LANDSCAPE"};
  return kNames[static_cast<int>(v)];
}

std::string_view toString(Traversal v) {
  static constexpr std::string_view kNames[] = {"TOP_DOWN", "BOTTOM_UP"};
  return kNames[static_cast<int>(v)];
}

std::string_view toString(TextMode v) {
  static constexpr std::string_view kNames[] = {"NONE", "EXPECTED", "UNEXPECTED"};
  return kNames[static_cast<int>(v)];
}

std::string_view toString(ContextMode v) {
  static constexpr std::string_view kNames[] = {"NORMAL", "ADVERSE"};
  return kNames[static_cast<int>(v)];
}

std::string_view toString(EventResult v) {
  static constexpr std::string_view kNames[] = {"OK", "NO_EFFECT", "CRASHED"};
  return kNames[static_cast<int>(v)];
}

std::string_view toString(TraceOutcome v) {
  static constexpr std::string_view kNames[] = {"COMPLETED", "CRASHED", "BUDGET_EXHAUSTED"};
  return kNames[static_cast<int>(v)];
}

}  // namespace crashscope
