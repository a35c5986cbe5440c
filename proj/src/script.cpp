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

#include "crashscope/script.hpp"

#include <charconv>
#include <sstream>

#include "crashscope/ripper.hpp"

namespace crashscope {

namespace {

struct FeatureSpelling {
  ContextFeature feature;
  std::string_view word;
};

constexpr FeatureSpelling kFeatureWords[] = {
    {ContextFeature::Network, "WIFI"},
    {ContextFeature::Gps, "GPS"},
    {ContextFeature::Accelerometer, "ACCEL"},
    {ContextFeature::Magnetometer, "MAG"},
    {ContextFeature::Temperature, "TEMP"},
};

constexpr ContextValue kScriptValues[] = {ContextValue::On, ContextValue::Off,
                                          ContextValue::Infeasible, ContextValue::Normal};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

Point center(const Bounds& b) { return componentCenter(b); }

}  // namespace

std::string_view scriptFeatureName(ContextFeature f) {
  for (const auto& s : kFeatureWords) {
    if (s.feature == f) return s.word;
  }
  throw ContractViolation("no script spelling for " + std::string(toString(f)));
}

std::string_view toString(ReplayOutcome o) {
  switch (o) {
    case ReplayOutcome::Reproduced: return "REPRODUCED";
    case ReplayOutcome::Diverged: return "DIVERGED";
    case ReplayOutcome::CompletedNoCrash: return "COMPLETED_NO_CRASH";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Generation

CrashScript generateScript(const ExecutionTrace& trace, const CrashRecord& crash) {
  if (crash.crash_step_index < 1 ||
      crash.crash_step_index > static_cast<int>(trace.steps.size())) {
    throw ValidationError("crash_step_index", "outside trace " + trace.trace_id);
  }
  CrashScript script;
  script.header.app_id = trace.app_id;
  script.header.app_version = trace.app_version;
  script.header.resolution = crash.resolution;
  if (crash.orientation == Orientation::Landscape) {
    std::swap(script.header.resolution.width, script.header.resolution.height);
  }
  script.lines.push_back({});  // LAUNCH

  for (int i = 0; i < crash.crash_step_index; ++i) {
    const ExecutionStep& s = trace.steps[static_cast<std::size_t>(i)];
    const std::string where = "steps[" + std::to_string(i) + "]";
    ScriptCommand cmd;
    switch (s.event.action) {
      case Action::Tap:
      case Action::LongTap:
      case Action::Type:
        if (!s.target_bounds) {
          throw ValidationError(where, "step " + std::to_string(s.index) +
                                           " has no recorded component bounds");
        }
        cmd.kind = s.event.action == Action::Tap       ? ScriptCommand::Kind::Tap
                   : s.event.action == Action::LongTap ? ScriptCommand::Kind::LongTap
                                                       : ScriptCommand::Kind::Type;
        cmd.at = center(*s.target_bounds);
        if (s.event.text) cmd.text = *s.event.text;
        break;
      case Action::Rotate:
        cmd.kind = ScriptCommand::Kind::Rotate;
        cmd.orientation = s.context.orientation();
        break;
      case Action::ContextSet:
        cmd.kind = ScriptCommand::Kind::Context;
        cmd.feature = *s.event.context_feature;
        cmd.value = *s.event.context_value;
        break;
      case Action::Launch:
        cmd.kind = ScriptCommand::Kind::Launch;
        break;
      case Action::Back:
        throw ValidationError(where, "BACK has no script command");
    }
    script.lines.push_back(std::move(cmd));
  }
  return script;
}

// ---------------------------------------------------------------------------
// Text form

std::string serializeScript(const CrashScript& script) {
  std::ostringstream out;
  out << "# app: " << script.header.app_id << "@" << script.header.app_version << "\n"
      << "# resolution: " << script.header.resolution.str() << "\n"
      << "# version: " << script.header.version << "\n";
  for (const auto& c : script.lines) {
    switch (c.kind) {
      case ScriptCommand::Kind::Launch: out << "LAUNCH"; break;
      case ScriptCommand::Kind::Tap: out << "TAP " << c.at.x << " " << c.at.y; break;
      case ScriptCommand::Kind::LongTap:
        out << "LONGTAP " << c.at.x << " " << c.at.y;
        break;
      case ScriptCommand::Kind::Type:
        out << "TYPE " << c.at.x << " " << c.at.y << " " << quote(c.text);
        break;
      case ScriptCommand::Kind::Rotate: out << "ROTATE " << toString(c.orientation); break;
      case ScriptCommand::Kind::Context:
        out << "CONTEXT " << scriptFeatureName(c.feature) << " " << toString(c.value);
        break;
    }
    out << "\n";
  }
  return out.str();
}

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, int number) : rest_(line), number_(number) {}

  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError("line " + std::to_string(number_), why);
  }

  std::string_view word() {
    skipSpace();
    auto end = rest_.find_first_of(" \t");
    std::string_view w = rest_.substr(0, end);
    rest_.remove_prefix(w.size());
    if (w.empty()) fail("unexpected end of line");
    return w;
  }

  int integer() {
    std::string_view w = word();
    int v = 0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) {
      fail("expected an integer, got '" + std::string(w) + "'");
    }
    return v;
  }

  std::string quoted() {
    skipSpace();
    if (rest_.empty() || rest_.front() != '"') fail("expected a quoted string");
    rest_.remove_prefix(1);
    std::string out;
    while (!rest_.empty()) {
      char c = rest_.front();
      rest_.remove_prefix(1);
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (rest_.empty()) break;
      char e = rest_.front();
      rest_.remove_prefix(1);
      switch (e) {
        case '\\': out += '\\'; break;
        case '"': out += '"'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        default: fail(std::string("unknown escape \\") + e);
      }
    }
    fail("unterminated string");
  }

  void end() {
    skipSpace();
    if (!rest_.empty()) fail("trailing input '" + std::string(rest_) + "'");
  }

 private:
  void skipSpace() {
    while (!rest_.empty() && (rest_.front() == ' ' || rest_.front() == '\t')) {
      rest_.remove_prefix(1);
    }
  }

  std::string_view rest_;
  int number_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Resolution parseResolution(std::string_view s, const LineParser& p) {
  auto x = s.find('x');
  Resolution r{};
  if (x == std::string_view::npos) p.fail("resolution must look like 1080x1920");
  auto a = std::from_chars(s.data(), s.data() + x, r.width);
  auto b = std::from_chars(s.data() + x + 1, s.data() + s.size(), r.height);
  if (a.ec != std::errc() || a.ptr != s.data() + x || b.ec != std::errc() ||
      b.ptr != s.data() + s.size() || r.width <= 0 || r.height <= 0) {
    p.fail("resolution must look like 1080x1920");
  }
  return r;
}

}  // namespace

CrashScript parseScript(std::string_view text) {
  CrashScript script;
  bool have_app = false, have_res = false, have_version = false;
  int number = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    LineParser p(raw, number);
    std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;  // free comment
      std::string_view key = trim(body.substr(0, colon));
      std::string_view value = trim(body.substr(colon + 1));
      if (key == "app") {
        auto at = value.rfind('@');
        if (at == std::string_view::npos || at == 0) p.fail("app must be <id>@<version>");
        script.header.app_id = std::string(value.substr(0, at));
        script.header.app_version = std::string(value.substr(at + 1));
        have_app = true;
      } else if (key == "resolution") {
        script.header.resolution = parseResolution(value, p);
        have_res = true;
      } else if (key == "version") {
        if (value != std::to_string(kScriptVersion)) {
          p.fail("unsupported script version '" + std::string(value) + "'");
        }
        have_version = true;
      }
      continue;
    }

    ScriptCommand c;
    std::string_view op = p.word();
    if (op == "LAUNCH") {
      c.kind = ScriptCommand::Kind::Launch;
    } else if (op == "TAP" || op == "LONGTAP" || op == "TYPE") {
      c.kind = op == "TAP"       ? ScriptCommand::Kind::Tap
               : op == "LONGTAP" ? ScriptCommand::Kind::LongTap
                                 : ScriptCommand::Kind::Type;
      c.at.x = p.integer();
      c.at.y = p.integer();
      if (c.kind == ScriptCommand::Kind::Type) c.text = p.quoted();
    } else if (op == "ROTATE") {
      std::string_view o = p.word();
      if (o == "PORTRAIT") c.orientation = Orientation::Portrait;
      else if (o == "LANDSCAPE") c.orientation = Orientation::Landscape;
      else p.fail("ROTATE takes PORTRAIT or LANDSCAPE");
      c.kind = ScriptCommand::Kind::Rotate;
    } else if (op == "CONTEXT") {
      c.kind = ScriptCommand::Kind::Context;
      std::string_view f = p.word();
      bool found = false;
      for (const auto& s : kFeatureWords) {
        if (s.word == f) {
          c.feature = s.feature;
          found = true;
        }
      }
      if (!found) p.fail("unknown context feature '" + std::string(f) + "'");
      std::string_view v = p.word();
      found = false;
      for (ContextValue cv : kScriptValues) {
        if (toString(cv) == v) {
          c.value = cv;
          found = true;
        }
      }
      if (!found || !valueAllowed(c.feature, c.value)) {
        p.fail("bad value '" + std::string(v) + "' for " + std::string(f));
      }
    } else {
      p.fail("unknown command '" + std::string(op) + "'");
    }
    p.end();
    script.lines.push_back(std::move(c));
  }
  if (!have_app) throw ValidationError("header", "missing '# app:' line");
  if (!have_res) throw ValidationError("header", "missing '# resolution:' line");
  if (!have_version) throw ValidationError("header", "missing '# version:' line");
  for (std::size_t i = 0; i < script.lines.size(); ++i) {
    const auto& c = script.lines[i];
    const Resolution& r = script.header.resolution;
    if (c.isPointer() && (c.at.x < 0 || c.at.y < 0 || c.at.x >= r.width || c.at.y >= r.height)) {
      throw ValidationError("command " + std::to_string(i + 1),
                            "pointer outside " + r.str());
    }
  }
  return script;
}

// ---------------------------------------------------------------------------
// Replay

ReplayResult replayScript(const CrashScript& script, DevicePort& device,
                          std::string_view app_package) {
  const Resolution native = device.nativeResolution();
  if (!(native == script.header.resolution)) {
    throw ValidationError("resolution", "script recorded at " +
                                            script.header.resolution.str() +
                                            ", device is " + native.str());
  }
  ReplayResult r;
  const int last = static_cast<int>(script.lines.size());
  for (int i = 1; i <= last; ++i) {
    const ScriptCommand& c = script.lines[static_cast<std::size_t>(i - 1)];
    r.line = i;
    UiEvent event;
    try {
      switch (c.kind) {
        case ScriptCommand::Kind::Launch:
          event = UiEvent::launch();
          break;
        case ScriptCommand::Kind::Tap:
        case ScriptCommand::Kind::LongTap:
        case ScriptCommand::Kind::Type: {
          // Only asks whether anything is under the pointer; the device
          // resolves the actual target from the coordinates.
          const ScreenState now = device.queryHierarchy();
          const GuiComponent* hit = nullptr;
          for (const auto& comp : now.components) {
            if (comp.bounds.contains(c.at)) hit = &comp;
          }
          if (!hit) {
            r.outcome = ReplayOutcome::Diverged;
            r.detail = "pointer (" + std::to_string(c.at.x) + "," +
                       std::to_string(c.at.y) + ") hits no component";
            return r;
          }
          event = c.kind == ScriptCommand::Kind::Tap ? UiEvent::tap(hit->id, c.at)
                  : c.kind == ScriptCommand::Kind::LongTap
                      ? UiEvent::longTap(hit->id, c.at)
                      : UiEvent::type(hit->id, c.at, c.text);
          break;
        }
        case ScriptCommand::Kind::Rotate:
          event = UiEvent::rotate();
          break;
        case ScriptCommand::Kind::Context:
          event = UiEvent::contextSet(c.feature, c.value);
          break;
      }
      device.executeEvent(event);
    } catch (const DeviceError& e) {
      r.outcome = ReplayOutcome::Diverged;
      r.detail = e.what();
      return r;
    }

    CrashDetection d = detectCrash(device, app_package);
    if (d.crash) {
      r.signature = d.crash->signature;
      r.outcome = i == last ? ReplayOutcome::Reproduced : ReplayOutcome::Diverged;
      if (i != last) r.detail = "crashed before the final command";
      return r;
    }
    if (c.kind == ScriptCommand::Kind::Rotate &&
        device.context().orientation() != c.orientation) {
      r.outcome = ReplayOutcome::Diverged;
      r.detail = "device did not turn to " + std::string(toString(c.orientation));
      return r;
    }
  }
  r.outcome = ReplayOutcome::CompletedNoCrash;
  return r;
}

}  // namespace crashscope
