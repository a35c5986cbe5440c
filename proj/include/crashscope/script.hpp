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

// Replayable crash scripts.
//
//   # app: two_screen_login@1.0.0
//   # resolution: 1080x1920
//   # version: 1
//   LAUNCH
//   TYPE 540 370 "abc"
//   TAP 540 910
//   CONTEXT WIFI OFF
//   ROTATE LANDSCAPE
//
// Pointer commands carry absolute coordinates; the replayer drives the
// device by coordinates alone, the way adb input does.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crashscope/device.hpp"
#include "crashscope/domain.hpp"

namespace crashscope {

inline constexpr int kScriptVersion = 1;

struct ScriptCommand {
  enum class Kind { Launch, Tap, LongTap, Type, Rotate, Context };
  Kind kind = Kind::Launch;
  Point at;                                       // Tap, LongTap, Type
  std::string text;                               // Type
  Orientation orientation = Orientation::Portrait;  // Rotate: after the turn
  ContextFeature feature = ContextFeature::Network;  // Context
  ContextValue value = ContextValue::On;             // Context

  bool isPointer() const {
    return kind == Kind::Tap || kind == Kind::LongTap || kind == Kind::Type;
  }
  friend bool operator==(const ScriptCommand&, const ScriptCommand&) = default;
};

struct ScriptHeader {
  std::string app_id;
  std::string app_version;
  Resolution resolution;  // portrait, native
  int version = kScriptVersion;
  friend bool operator==(const ScriptHeader&, const ScriptHeader&) = default;
};

struct CrashScript {
  ScriptHeader header;
  std::vector<ScriptCommand> lines;
  friend bool operator==(const CrashScript&, const CrashScript&) = default;
};

// Script spelling of a feature: NETWORK is WIFI, then GPS, ACCEL, MAG, TEMP.
std::string_view scriptFeatureName(ContextFeature f);

// LAUNCH followed by one line per step up to the crash step. Throws
// ValidationError naming the step when a pointer step has no recorded bounds
// or the event has no script form.
CrashScript generateScript(const ExecutionTrace& trace, const CrashRecord& crash);

std::string serializeScript(const CrashScript& script);
// Throws ValidationError with path "line N".
CrashScript parseScript(std::string_view text);

enum class ReplayOutcome { Reproduced, Diverged, CompletedNoCrash };
std::string_view toString(ReplayOutcome o);

struct ReplayResult {
  ReplayOutcome outcome = ReplayOutcome::CompletedNoCrash;
  std::optional<std::string> signature;  // Reproduced, or the early crash
  int line = 0;  // 1-based command index where replay stopped
  std::string detail;
};

// Refuses (ValidationError) when the device's native resolution differs from
// the script header.
ReplayResult replayScript(const CrashScript& script, DevicePort& device,
                          std::string_view app_package);

}  // namespace crashscope
