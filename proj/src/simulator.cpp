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

#include "crashscope/simulator.hpp"

#include <ctime>
#include <sstream>

namespace crashscope {
namespace {

std::string xmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

void rect(std::ostringstream& svg, const Bounds& b, std::string_view cls) {
  svg << "<rect class=\"" << cls << "\" x=\"" << b.left << "\" y=\"" << b.top
      << "\" width=\"" << (b.right - b.left) << "\" height=\""
      << (b.bottom - b.top) << "\"/>";
}

}  // namespace

SimulatedDevice::SimulatedDevice(std::shared_ptr<const AppModel> model,
                                 SessionOptions options)
    : model_(std::move(model)), options_(options) {
  resetApp();
}

const SimScreen& SimulatedDevice::currentScreen() const {
  return model_->screens[screen_];
}

void SimulatedDevice::requireNoDialog() const {
  if (crash_dialog_) {
    throw DeviceError(DeviceErrorCode::CrashDialogBlocking,
                      "'" + model_->app.name + "' has stopped: crash dialog is "
                      "blocking the screen");
  }
}

Resolution SimulatedDevice::resolution() const {
  if (context_.orientation() == Orientation::Landscape) {
    return Resolution{kSimResolution.height, kSimResolution.width};
  }
  return kSimResolution;
}

ScreenState SimulatedDevice::queryHierarchy() const {
  requireNoDialog();
  const SimScreen& s = currentScreen();
  return makeScreenState(s.activity, s.components, context_.orientation());
}

void SimulatedDevice::resetApp() {
  for (std::size_t i = 0; i < model_->screens.size(); ++i) {
    if (model_->screens[i].id == model_->initial_screen) screen_ = i;
  }
  context_ = ContextState();
  texts_.clear();
  crash_dialog_ = false;
}

std::vector<StackTrace> SimulatedDevice::drainExceptionLog() {
  std::vector<StackTrace> out;
  out.swap(exception_log_);
  return out;
}

std::string SimulatedDevice::timestamp() const {
  std::time_t t = static_cast<std::time_t>(options_.clock_epoch + events_);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void SimulatedDevice::raise(const CrashRule& rule) {
  StackTrace captured = rule.exception;
  const std::string pid = std::to_string(options_.pid);
  captured.message += (captured.message.empty() ? "" : " ") + ("(pid " + pid + ")");
  captured.raw_noise = {"pid=" + pid, timestamp()};
  exception_log_.push_back(std::move(captured));
  if (!rule.silent) crash_dialog_ = true;
}

bool SimulatedDevice::triggerMatches(const Trigger& rule,
                                     const Trigger& fired) const {
  if (rule.kind != fired.kind) return false;
  switch (rule.kind) {
    case Trigger::Kind::Component:
      return rule.component == fired.component && rule.action == fired.action;
    case Trigger::Kind::ContextSet:
      return rule.feature == fired.feature && rule.value == fired.value;
    default:
      return true;
  }
}

bool SimulatedDevice::guardHolds(const std::optional<Predicate>& guard) const {
  if (!guard) return true;
  const SimScreen& s = currentScreen();
  static const std::map<std::string, std::string> kNoText;
  auto it = texts_.find(s.id);
  return evaluate(*guard, s, it == texts_.end() ? kNoText : it->second,
                  context_);
}

EventResult SimulatedDevice::applyRules(const Trigger& fired) {
  const SimScreen& s = currentScreen();
  // Crash rules dominate transitions. Silent rules only log.
  const CrashRule* fatal = nullptr;
  for (const auto& rule : model_->crash_rules) {
    if (rule.screen != s.id || !triggerMatches(rule.trigger, fired) ||
        !guardHolds(rule.guard)) {
      continue;
    }
    if (rule.silent) {
      raise(rule);
    } else if (!fatal) {
      fatal = &rule;
    }
  }
  if (fatal) {
    raise(*fatal);
    return EventResult::Crashed;
  }
  if (fired.kind == Trigger::Kind::Rotate || fired.kind == Trigger::Kind::ContextSet) {
    return EventResult::Ok;
  }
  for (const auto& rule : model_->transitions) {
    if (rule.from != s.id || !triggerMatches(rule.trigger, fired) ||
        !guardHolds(rule.guard)) {
      continue;
    }
    if (rule.once && consumed_once_.count(*rule.once)) continue;
    if (rule.once) consumed_once_.insert(*rule.once);
    for (std::size_t i = 0; i < model_->screens.size(); ++i) {
      if (model_->screens[i].id == rule.to) screen_ = i;
    }
    return EventResult::Ok;
  }
  return EventResult::NoEffect;
}

EventResult SimulatedDevice::pointerEvent(const UiEvent& event) {
  const Point p = *event.coordinates;
  const Resolution res = resolution();
  if (p.x < 0 || p.y < 0 || p.x >= res.width || p.y >= res.height) {
    throw DeviceError(DeviceErrorCode::OutOfScreen,
                      "pointer (" + std::to_string(p.x) + "," +
                          std::to_string(p.y) + ") outside " + res.str());
  }
  const SimScreen& s = currentScreen();
  // Topmost = latest in pre-order.
  const GuiComponent* hit = nullptr;
  for (const auto& c : s.components) {
    if (c.bounds.contains(p)) hit = &c;
  }
  if (!hit) return EventResult::NoEffect;

  if (event.action == Action::Type) {
    if (hit->kind != ComponentKind::TextField) return EventResult::NoEffect;
    texts_[s.id][hit->id] = *event.text;
    return EventResult::Ok;
  }
  const bool accepts = event.action == Action::Tap ? hit->clickable
                                                   : hit->long_clickable;
  if (!accepts) return EventResult::NoEffect;
  Trigger fired;
  fired.kind = Trigger::Kind::Component;
  fired.component = hit->id;
  fired.action = event.action;
  return applyRules(fired);
}

EventResult SimulatedDevice::executeEvent(const UiEvent& event) {
  try {
    event.validate();
  } catch (const ContractViolation& e) {
    throw DeviceError(DeviceErrorCode::InvalidEvent, e.what());
  }
  if (event.action == Action::Launch) {
    // Relaunch is the one event the crash dialog does not block.
    ++events_;
    resetApp();
    return EventResult::Ok;
  }
  requireNoDialog();
  ++events_;

  Trigger fired;
  switch (event.action) {
    case Action::Tap:
    case Action::LongTap:
    case Action::Type:
      return pointerEvent(event);
    case Action::Back:
      fired.kind = Trigger::Kind::Back;
      return applyRules(fired);
    case Action::Rotate: {
      const ActivityDecl* a = model_->activity(currentScreen().activity);
      if (!a || !a->rotatable) return EventResult::NoEffect;
      context_.set(ContextFeature::Rotation,
                   context_.orientation() == Orientation::Portrait
                       ? ContextValue::Landscape
                       : ContextValue::Portrait);
      fired.kind = Trigger::Kind::Rotate;
      return applyRules(fired);
    }
    case Action::ContextSet:
      context_.set(*event.context_feature, *event.context_value);
      fired.kind = Trigger::Kind::ContextSet;
      fired.feature = *event.context_feature;
      fired.value = *event.context_value;
      return applyRules(fired);
    case Action::Launch:
      break;
  }
  return EventResult::NoEffect;
}

std::string SimulatedDevice::screenshot(
    const std::optional<std::string>& highlight) const {
  const Resolution res = resolution();
  const SimScreen& s = currentScreen();
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << res.width << "\" height=\"" << res.height << "\" viewBox=\"0 0 "
      << res.width << " " << res.height << "\">\n"
      << "<style>.screen{fill:#fafafa;stroke:#333}"
         ".component rect{fill:#e3e9f2;stroke:#556}"
         ".component text{font:28px sans-serif;fill:#111}"
         ".highlight{fill:none;stroke:#e02020;stroke-width:8}"
         ".crash-dialog rect{fill:#000;fill-opacity:0.6}"
         ".crash-dialog text{font:36px sans-serif;fill:#fff}</style>\n";
  rect(svg, Bounds{0, 0, res.width - 1, res.height - 1}, "screen");
  svg << "\n<text class=\"activity\" x=\"16\" y=\"40\">" << xmlEscape(s.activity)
      << "</text>\n";
  auto texts = texts_.find(s.id);
  for (const auto& c : s.components) {
    svg << "<g class=\"component\" id=\"c-" << xmlEscape(c.id) << "\">";
    rect(svg, c.bounds, "bounds");
    std::string shown = c.label;
    if (texts != texts_.end()) {
      if (auto t = texts->second.find(c.id); t != texts->second.end()) {
        shown = t->second;
      }
    }
    svg << "<text x=\"" << c.bounds.left + 8 << "\" y=\""
        << (c.bounds.top + c.bounds.bottom) / 2 << "\">" << xmlEscape(shown)
        << "</text></g>\n";
  }
  if (highlight) {
    if (const GuiComponent* c = s.find(*highlight)) {
      rect(svg, c->bounds, "highlight");
      svg << "\n";
    }
  }
  if (crash_dialog_) {
    svg << "<g class=\"crash-dialog\">";
    rect(svg, Bounds{0, 0, res.width - 1, res.height - 1}, "overlay");
    svg << "<text x=\"" << res.width / 8 << "\" y=\"" << res.height / 2
        << "\">Unfortunately, " << xmlEscape(model_->app.name)
        << " has stopped.</text></g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::unique_ptr<SimulatedDevice> launch(std::shared_ptr<const AppModel> model,
                                        SessionOptions options) {
  return std::make_unique<SimulatedDevice>(std::move(model), options);
}

DeviceFactory simulatorFactory(std::shared_ptr<const AppModel> model,
                               SessionOptions options) {
  return [model = std::move(model), options]() -> std::unique_ptr<DevicePort> {
    return launch(model, options);
  };
}

}  // namespace crashscope
