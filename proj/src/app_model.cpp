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

#include <fstream>
#include <sstream>

#include "crashscope/schema.hpp"
#include "crashscope/simulator.hpp"
#include "crashscope/textgen.hpp"

namespace crashscope {
namespace {

std::string at(const std::string& path, std::string_view key) {
  return path + "." + std::string(key);
}

std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

template <typename E>
E enumValue(const Json& j, const std::string& path) {
  try {
    return enumFromString<E>(j.get<std::string>(), path);
  } catch (const ContractViolation& e) {
    throw ModelError(path, e.what());
  }
}

Predicate parsePredicate(const Json& j, const std::string& path) {
  Predicate p;
  if (j.contains("all")) {
    p.kind = Predicate::Kind::All;
    const auto& items = j.at("all");
    for (std::size_t i = 0; i < items.size(); ++i) {
      p.all.push_back(parsePredicate(items[i], at(at(path, "all"), i)));
    }
  } else if (j.contains("text")) {
    p.kind = Predicate::Kind::Text;
    p.field = j.at("text").get<std::string>();
    const auto check = j.at("check").get<std::string>();
    if (check == "IS_EMPTY") {
      p.check = Predicate::TextCheck::IsEmpty;
    } else if (check == "CONTAINS_SPECIAL") {
      p.check = Predicate::TextCheck::ContainsSpecial;
    } else if (check == "NOT_MATCHING_KEYBOARD") {
      p.check = Predicate::TextCheck::NotMatchingKeyboard;
    } else {
      p.check = Predicate::TextCheck::LengthGt;
      if (!j.contains("n")) throw ModelError(at(path, "n"), "LENGTH_GT needs n");
      p.n = j.at("n").get<int>();
    }
  } else {
    p.kind = Predicate::Kind::Context;
    p.feature = enumValue<ContextFeature>(j.at("context"), at(path, "context"));
    p.value = enumValue<ContextValue>(j.at("equals"), at(path, "equals"));
    if (!valueAllowed(p.feature, p.value)) {
      throw ModelError(at(path, "equals"), "value not valid for feature");
    }
  }
  return p;
}

Trigger parseTrigger(const Json& j, const std::string& path) {
  Trigger t;
  if (j.is_string()) {
    t.kind = j.get<std::string>() == "BACK" ? Trigger::Kind::Back
                                            : Trigger::Kind::Rotate;
    return t;
  }
  if (j.contains("context_set")) {
    const auto& c = j.at("context_set");
    t.kind = Trigger::Kind::ContextSet;
    t.feature = enumValue<ContextFeature>(c.at("feature"),
                                          at(at(path, "context_set"), "feature"));
    t.value = enumValue<ContextValue>(c.at("value"),
                                      at(at(path, "context_set"), "value"));
    if (t.feature == ContextFeature::Rotation || !valueAllowed(t.feature, t.value)) {
      throw ModelError(at(path, "context_set"), "invalid feature/value pair");
    }
    return t;
  }
  t.kind = Trigger::Kind::Component;
  t.component = j.at("component").get<std::string>();
  t.action = enumValue<Action>(j.at("action"), at(path, "action"));
  return t;
}

StackTrace parseException(const Json& j, const std::string& path) {
  StackTrace t;
  t.exception_type = j.at("type").get<std::string>();
  t.message = j.value("message", std::string());
  const auto& frames = j.at("frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    try {
      t.frames.push_back(parseStackFrame(frames[i].get<std::string>()));
    } catch (const ContractViolation& e) {
      throw ModelError(at(at(path, "frames"), i), e.what());
    }
  }
  return t;
}

// Semantic checks that the schema cannot express.
class Checker {
 public:
  explicit Checker(const AppModel& m) : m_(m) {}

  const SimScreen& screen(const std::string& id, const std::string& path) const {
    for (const auto& s : m_.screens) {
      if (s.id == id) return s;
    }
    throw ModelError(path, "unknown screen '" + id + "'");
  }

  void trigger(const Trigger& t, const SimScreen& s,
               const std::string& path) const {
    if (t.kind != Trigger::Kind::Component) return;
    const GuiComponent* c = s.find(t.component);
    if (!c) {
      throw ModelError(at(path, "component"), "unknown component '" +
                                                  t.component + "' on screen '" +
                                                  s.id + "'");
    }
    if (t.action == Action::Tap && !c->clickable) {
      throw ModelError(at(path, "component"),
                       "TAP trigger on non-clickable '" + c->id + "'");
    }
    if (t.action == Action::LongTap && !c->long_clickable) {
      throw ModelError(at(path, "component"),
                       "LONG_TAP trigger on non-long-clickable '" + c->id + "'");
    }
    if (t.action != Action::Tap && t.action != Action::LongTap) {
      throw ModelError(at(path, "action"), "component triggers are TAP or LONG_TAP");
    }
  }

  void predicate(const Predicate& p, const SimScreen& s,
                 const std::string& path) const {
    switch (p.kind) {
      case Predicate::Kind::All:
        for (std::size_t i = 0; i < p.all.size(); ++i) {
          predicate(p.all[i], s, at(at(path, "all"), i));
        }
        break;
      case Predicate::Kind::Text: {
        const GuiComponent* c = s.find(p.field);
        if (!c || c->kind != ComponentKind::TextField) {
          throw ModelError(at(path, "text"), "'" + p.field +
                                                 "' is not a text field on screen '" +
                                                 s.id + "'");
        }
        break;
      }
      case Predicate::Kind::Context:
        break;
    }
  }

 private:
  const AppModel& m_;
};

bool sameTrigger(const Trigger& a, const Trigger& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Trigger::Kind::Component:
      return a.component == b.component && a.action == b.action;
    case Trigger::Kind::ContextSet:
      return a.feature == b.feature && a.value == b.value;
    default:
      return true;
  }
}

}  // namespace

const GuiComponent* SimScreen::find(std::string_view component_id) const {
  for (const auto& c : components) {
    if (c.id == component_id) return &c;
  }
  return nullptr;
}

const SimScreen& AppModel::screen(std::string_view id) const {
  for (const auto& s : screens) {
    if (s.id == id) return s;
  }
  throw ContractViolation("unknown screen '" + std::string(id) + "'");
}

const ActivityDecl* AppModel::activity(std::string_view name) const {
  for (const auto& a : activities) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const CrashRule* AppModel::crashRule(std::string_view id) const {
  for (const auto& r : crash_rules) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

AppModel loadAppModel(std::string_view document) {
  Json j;
  try {
    j = Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw ModelError("", std::string("malformed JSON: ") + e.what());
  }
  return appModelFromJson(j);
}

AppModel appModelFromJson(const Json& j) {
  try {
    requireValid("app-model", j);
  } catch (const SchemaError& e) {
    throw ModelError(e.path(), e.issues().front().message);
  }

  AppModel m;
  const auto& app = j.at("app");
  m.app = AppInfo{app.at("id").get<std::string>(), app.at("name").get<std::string>(),
                  app.at("version").get<std::string>(),
                  app.at("package").get<std::string>()};

  const auto& activities = j.at("activities");
  for (std::size_t i = 0; i < activities.size(); ++i) {
    ActivityDecl a{activities[i].at("name").get<std::string>(),
                   activities[i].value("rotatable", false)};
    if (m.activity(a.name)) {
      throw ModelError(at(at("activities", i), "name"),
                       "duplicate activity '" + a.name + "'");
    }
    m.activities.push_back(std::move(a));
  }

  const auto& screens = j.at("screens");
  for (std::size_t i = 0; i < screens.size(); ++i) {
    const std::string path = at("screens", i);
    const auto& sj = screens[i];
    SimScreen s;
    s.id = sj.at("id").get<std::string>();
    s.activity = sj.at("activity").get<std::string>();
    s.initial = sj.value("initial", false);
    for (const auto& other : m.screens) {
      if (other.id == s.id) {
        throw ModelError(at(path, "id"), "duplicate screen id '" + s.id + "'");
      }
    }
    if (!m.activity(s.activity)) {
      throw ModelError(at(path, "activity"),
                       "undeclared activity '" + s.activity + "'");
    }
    const auto& comps = sj.at("components");
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const std::string cpath = at(at(path, "components"), k);
      GuiComponent c;
      try {
        c = comps[k].get<GuiComponent>();
      } catch (const ContractViolation& e) {
        throw ModelError(cpath, e.what());
      }
      if (s.find(c.id)) {
        throw ModelError(at(cpath, "id"), "duplicate component id '" + c.id + "'");
      }
      if ((c.kind == ComponentKind::TextField) != c.keyboard_type.has_value()) {
        throw ModelError(at(cpath, "keyboard_type"),
                         "keyboard_type must be present exactly for TEXT_FIELD");
      }
      const auto& b = c.bounds;
      if (!b.valid() || b.right >= kSimResolution.width ||
          b.bottom >= kSimResolution.height) {
        throw ModelError(at(cpath, "bounds"), "bounds outside the 1080x1920 screen");
      }
      s.components.push_back(std::move(c));
    }
    if (s.initial) {
      if (!m.initial_screen.empty()) {
        throw ModelError(at(path, "initial"),
                         "duplicate initial screen (already '" +
                             m.initial_screen + "')");
      }
      m.initial_screen = s.id;
    }
    m.screens.push_back(std::move(s));
  }
  if (m.initial_screen.empty()) {
    throw ModelError("screens", "no screen flagged initial");
  }

  Checker check(m);
  const auto& transitions = j.value("transitions", Json::array());
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const std::string path = at("transitions", i);
    const auto& tj = transitions[i];
    TransitionRule r;
    r.from = tj.at("from").get<std::string>();
    r.to = tj.at("to").get<std::string>();
    r.trigger = parseTrigger(tj.at("trigger"), at(path, "trigger"));
    if (tj.contains("guard")) r.guard = parsePredicate(tj.at("guard"), at(path, "guard"));
    if (tj.contains("once")) r.once = tj.at("once").get<std::string>();
    if (r.trigger.kind == Trigger::Kind::Rotate ||
        r.trigger.kind == Trigger::Kind::ContextSet) {
      throw ModelError(at(path, "trigger"), "transitions fire on TAP, LONG_TAP or BACK");
    }
    const SimScreen& from = check.screen(r.from, at(path, "from"));
    check.screen(r.to, at(path, "to"));
    check.trigger(r.trigger, from, at(path, "trigger"));
    if (r.guard) check.predicate(*r.guard, from, at(path, "guard"));
    m.transitions.push_back(std::move(r));
  }

  const auto& crash_rules = j.value("crash_rules", Json::array());
  for (std::size_t i = 0; i < crash_rules.size(); ++i) {
    const std::string path = at("crash_rules", i);
    const auto& cj = crash_rules[i];
    CrashRule r;
    r.id = cj.value("id", "crash_" + std::to_string(i));
    r.screen = cj.at("screen").get<std::string>();
    r.trigger = parseTrigger(cj.at("trigger"), at(path, "trigger"));
    if (cj.contains("guard")) r.guard = parsePredicate(cj.at("guard"), at(path, "guard"));
    r.exception = parseException(cj.at("exception"), at(path, "exception"));
    r.silent = cj.value("silent", false);
    if (r.trigger.kind == Trigger::Kind::Back) {
      throw ModelError(at(path, "trigger"), "crash rules cannot fire on BACK");
    }
    if (m.crashRule(r.id)) {
      throw ModelError(at(path, "id"), "duplicate crash rule id '" + r.id + "'");
    }
    const SimScreen& s = check.screen(r.screen, at(path, "screen"));
    check.trigger(r.trigger, s, at(path, "trigger"));
    if (r.guard) check.predicate(*r.guard, s, at(path, "guard"));
    m.crash_rules.push_back(std::move(r));
  }

  // First-rule-wins: an unconditional earlier rule hides later ones.
  for (std::size_t i = 0; i < m.transitions.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const auto& early = m.transitions[k];
      const auto& late = m.transitions[i];
      if (early.from == late.from && sameTrigger(early.trigger, late.trigger) &&
          !early.guard && !early.once) {
        m.warnings.push_back(at("transitions", i) + " is shadowed by " +
                             at("transitions", k));
        break;
      }
    }
  }
  return m;
}

AppModel loadAppModelFile(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ModelError("", "cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return loadAppModel(buf.str());
}

bool evaluate(const Predicate& p, const SimScreen& screen,
              const std::map<std::string, std::string>& texts,
              const ContextState& context) {
  switch (p.kind) {
    case Predicate::Kind::All:
      for (const auto& sub : p.all) {
        if (!evaluate(sub, screen, texts, context)) return false;
      }
      return true;
    case Predicate::Kind::Context:
      return context.get(p.feature) == p.value;
    case Predicate::Kind::Text: {
      auto it = texts.find(p.field);
      const std::string empty;
      const std::string& text = it == texts.end() ? empty : it->second;
      const GuiComponent* c = screen.find(p.field);
      const KeyboardType kb =
          c && c->keyboard_type ? *c->keyboard_type : KeyboardType::Text;
      switch (p.check) {
        case Predicate::TextCheck::IsEmpty:
          return text.empty();
        case Predicate::TextCheck::ContainsSpecial:
          return containsSpecial(kb, text);
        case Predicate::TextCheck::NotMatchingKeyboard:
          return !matchesKeyboard(kb, text);
        case Predicate::TextCheck::LengthGt:
          return static_cast<int>(text.size()) > p.n;
      }
    }
  }
  return false;
}

}  // namespace crashscope
