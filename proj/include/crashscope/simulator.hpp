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

// Deterministic simulated device and app.
//
// An AppModel is a declarative GUI state machine: screens with component
// hierarchies, transition rules, crash rules and context sensitivities. A
// SimulatedDevice runs one model and implements the DevicePort seam that the
// exploration engine drives; a real emulator backend would implement the same
// interface.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "crashscope/device.hpp"
#include "crashscope/domain.hpp"

namespace crashscope {

// Canonical portrait resolution of every simulated device.
inline constexpr Resolution kSimResolution{1080, 1920};
inline constexpr std::string_view kSimIdentification = "sim-1080x1920/v1";

// ---------------------------------------------------------------------------
// App model

struct ActivityDecl {
  std::string name;
  bool rotatable = false;
};

struct SimScreen {
  std::string id;
  std::string activity;
  bool initial = false;
  std::vector<GuiComponent> components;

  const GuiComponent* find(std::string_view component_id) const;
};

struct Predicate {
  enum class Kind { Text, Context, All };
  enum class TextCheck { IsEmpty, ContainsSpecial, NotMatchingKeyboard, LengthGt };

  Kind kind = Kind::All;
  // Kind::Text
  std::string field;
  TextCheck check = TextCheck::IsEmpty;
  int n = 0;
  // Kind::Context
  ContextFeature feature = ContextFeature::Network;
  ContextValue value = ContextValue::On;
  // Kind::All
  std::vector<Predicate> all;
};

struct Trigger {
  enum class Kind { Component, Back, Rotate, ContextSet };

  Kind kind = Kind::Component;
  std::string component;
  Action action = Action::Tap;  // Tap or LongTap
  ContextFeature feature = ContextFeature::Network;
  ContextValue value = ContextValue::Off;
};

struct TransitionRule {
  std::string from;
  Trigger trigger;
  std::optional<Predicate> guard;
  std::string to;
  // Named one-shot flag: the rule fires only while the flag is unconsumed and
  // consumes it. Flags model persisted app data and survive resetApp.
  std::optional<std::string> once;
};

struct CrashRule {
  std::string id;
  std::string screen;
  Trigger trigger;
  std::optional<Predicate> guard;
  StackTrace exception;
  // Silent rules log an uncaught exception without showing the crash dialog.
  bool silent = false;
};

struct AppModel {
  AppInfo app;
  std::vector<ActivityDecl> activities;
  std::vector<SimScreen> screens;
  std::string initial_screen;
  std::vector<TransitionRule> transitions;
  std::vector<CrashRule> crash_rules;
  std::vector<std::string> warnings;  // e.g. shadowed transition rules

  const SimScreen& screen(std::string_view id) const;
  const ActivityDecl* activity(std::string_view name) const;
  const CrashRule* crashRule(std::string_view id) const;
};

using ModelError = ValidationError;

AppModel loadAppModel(std::string_view document);
AppModel appModelFromJson(const Json& document);
AppModel loadAppModelFile(const std::filesystem::path& file);

// Evaluates a guard against the entered text of the given screen and the
// current context.
bool evaluate(const Predicate& p, const SimScreen& screen,
              const std::map<std::string, std::string>& texts,
              const ContextState& context);

struct SessionOptions {
  int pid = 4211;
  std::int64_t clock_epoch = 1700000000;  // simulated wall clock start
};

class SimulatedDevice : public DevicePort {
 public:
  SimulatedDevice(std::shared_ptr<const AppModel> model, SessionOptions options);

  ScreenState queryHierarchy() const override;
  EventResult executeEvent(const UiEvent& event) override;
  std::vector<StackTrace> drainExceptionLog() override;
  bool crashDialogVisible() const override { return crash_dialog_; }
  void resetApp() override;
  std::string screenshot(
      const std::optional<std::string>& highlight = std::nullopt) const override;
  ContextState context() const override { return context_; }
  Resolution resolution() const override;
  Resolution nativeResolution() const override { return kSimResolution; }
  std::string identification() const override {
    return std::string(kSimIdentification);
  }
  std::string appPackage() const override { return model_->app.package; }

  const SimScreen& currentScreen() const;
  const AppModel& model() const { return *model_; }

 private:
  void requireNoDialog() const;
  EventResult pointerEvent(const UiEvent& event);
  EventResult applyRules(const Trigger& fired);
  bool triggerMatches(const Trigger& rule, const Trigger& fired) const;
  bool guardHolds(const std::optional<Predicate>& guard) const;
  void raise(const CrashRule& rule);
  std::string timestamp() const;

  std::shared_ptr<const AppModel> model_;
  SessionOptions options_;
  std::size_t screen_ = 0;
  ContextState context_;
  // screen id -> field id -> text
  std::map<std::string, std::map<std::string, std::string>> texts_;
  std::set<std::string> consumed_once_;
  bool crash_dialog_ = false;
  std::vector<StackTrace> exception_log_;
  std::int64_t events_ = 0;
};

std::unique_ptr<SimulatedDevice> launch(std::shared_ptr<const AppModel> model,
                                        SessionOptions options = {});

// Factory producing fresh sessions of one model.
DeviceFactory simulatorFactory(std::shared_ptr<const AppModel> model,
                               SessionOptions options = {});

}  // namespace crashscope
