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

// Contextual-feature extraction over an app IR.
//
// Each API call site tagged with a contextual feature is traced backwards
// through the call graph. If an activity entry point reaches the site, the
// feature is attributed to that activity; otherwise it is an app-level
// feature, exercised on every screen.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "crashscope/domain.hpp"

namespace crashscope {

struct ApiCall {
  std::string api;
  ContextFeature feature = ContextFeature::Network;
};

struct IrMethod {
  std::string id;
  std::string class_name;
  std::vector<ApiCall> api_calls;
};

struct CallEdge {
  std::string caller;
  std::string callee;
};

struct ManifestActivity {
  std::string name;
  bool rotatable = false;
};

struct AppIR {
  std::string package;
  std::vector<IrMethod> methods;
  std::vector<CallEdge> call_edges;
  std::map<std::string, std::vector<std::string>> activity_entries;
  std::vector<ManifestActivity> manifest;
};

struct FeatureMap {
  std::map<std::string, std::set<ContextFeature>> activity_level;
  std::set<ContextFeature> app_level;
  std::set<std::string> rotatable;
  std::set<std::string> activities;  // every manifest activity

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

// Throws ValidationError with the path of the offending field.
AppIR loadAppIR(std::string_view document);
AppIR appIRFromJson(const Json& document);
AppIR loadAppIRFile(const std::filesystem::path& file);
// Structural checks on an in-memory IR (edges and entries reference existing
// methods, entry activities are declared in the manifest).
void validateAppIR(const AppIR& ir);

FeatureMap extractFeatureMap(const AppIR& ir);

// Activity-level features of `activity` plus every app-level feature. An
// activity missing from the manifest gets app-level features only and a
// warning appended to `warnings` when given.
std::set<ContextFeature> featuresForScreen(
    const FeatureMap& map, std::string_view activity,
    std::vector<std::string>* warnings = nullptr);

void to_json(Json& j, const FeatureMap& v);
void from_json(const Json& j, FeatureMap& v);
Json toJson(const AppIR& ir);

}  // namespace crashscope
