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

// The seam between the exploration engine and an execution backend.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crashscope/domain.hpp"

namespace crashscope {

// Identity of the app under test, as known to the engine.
struct AppInfo {
  std::string id;
  std::string name;
  std::string version;
  std::string package;
};

enum class DeviceErrorCode { CrashDialogBlocking, OutOfScreen, InvalidEvent };

class DeviceError : public Error {
 public:
  DeviceError(DeviceErrorCode code, const std::string& message)
      : Error(message), code_(code) {}
  DeviceErrorCode code() const { return code_; }

 private:
  DeviceErrorCode code_;
};

// Everything the exploration engine needs from a device. Implementations are
// single-owner: one worker drives a session at a time.
class DevicePort {
 public:
  virtual ~DevicePort() = default;

  // Throws DeviceError(CrashDialogBlocking) while the crash dialog shows.
  virtual ScreenState queryHierarchy() const = 0;
  virtual EventResult executeEvent(const UiEvent& event) = 0;
  virtual std::vector<StackTrace> drainExceptionLog() = 0;
  virtual bool crashDialogVisible() const = 0;
  virtual void resetApp() = 0;
  virtual std::string screenshot(
      const std::optional<std::string>& highlight = std::nullopt) const = 0;
  virtual ContextState context() const = 0;
  // Resolution in the current orientation.
  virtual Resolution resolution() const = 0;
  // Portrait resolution, used by crash scripts.
  virtual Resolution nativeResolution() const = 0;
  // "<device>/<os version>"
  virtual std::string identification() const = 0;
  virtual std::string appPackage() const = 0;
};

using DeviceFactory = std::function<std::unique_ptr<DevicePort>()>;

}  // namespace crashscope
