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

#include "crashscope/analysis.hpp"

#include <deque>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "crashscope/schema.hpp"

namespace crashscope {

AppIR loadAppIR(std::string_view document) {
  Json j;
  try {
    j = Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw ValidationError("", std::string("malformed JSON: ") + e.what());
  }
  return appIRFromJson(j);
}

AppIR appIRFromJson(const Json& j) {
  try {
    requireValid("app-ir", j);
  } catch (const SchemaError& e) {
    throw ValidationError(e.path(), e.issues().front().message);
  }
  AppIR ir;
  ir.package = j.at("package").get<std::string>();
  for (const auto& mj : j.at("methods")) {
    IrMethod m{mj.at("id").get<std::string>(), mj.at("class").get<std::string>(), {}};
    for (const auto& cj : mj.value("api_calls", Json::array())) {
      m.api_calls.push_back(ApiCall{
          cj.at("api").get<std::string>(),
          enumFromString<ContextFeature>(cj.at("feature").get<std::string>(),
                                         "feature")});
    }
    ir.methods.push_back(std::move(m));
  }
  for (const auto& ej : j.at("call_edges")) {
    ir.call_edges.push_back(
        CallEdge{ej.at("caller").get<std::string>(), ej.at("callee").get<std::string>()});
  }
  for (auto it = j.at("activity_entries").begin(); it != j.at("activity_entries").end();
       ++it) {
    ir.activity_entries[it.key()] = it.value().get<std::vector<std::string>>();
  }
  for (const auto& aj : j.at("manifest").at("activities")) {
    ir.manifest.push_back(
        ManifestActivity{aj.at("name").get<std::string>(), aj.value("rotatable", false)});
  }
  validateAppIR(ir);
  return ir;
}

AppIR loadAppIRFile(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("", "cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return loadAppIR(buf.str());
}

void validateAppIR(const AppIR& ir) {
  std::set<std::string_view> ids;
  for (std::size_t i = 0; i < ir.methods.size(); ++i) {
    if (!ids.insert(ir.methods[i].id).second) {
      throw ValidationError("methods[" + std::to_string(i) + "].id",
                            "duplicate method '" + ir.methods[i].id + "'");
    }
    for (std::size_t k = 0; k < ir.methods[i].api_calls.size(); ++k) {
      if (ir.methods[i].api_calls[k].feature == ContextFeature::Rotation) {
        throw ValidationError("methods[" + std::to_string(i) + "].api_calls[" +
                                  std::to_string(k) + "].feature",
                              "rotation comes from the manifest, not API calls");
      }
    }
  }
  for (std::size_t i = 0; i < ir.call_edges.size(); ++i) {
    const auto path = "call_edges[" + std::to_string(i) + "]";
    if (!ids.count(ir.call_edges[i].caller)) {
      throw ValidationError(path + ".caller",
                            "unknown method '" + ir.call_edges[i].caller + "'");
    }
    if (!ids.count(ir.call_edges[i].callee)) {
      throw ValidationError(path + ".callee",
                            "unknown method '" + ir.call_edges[i].callee + "'");
    }
  }
  std::set<std::string_view> declared;
  for (const auto& a : ir.manifest) declared.insert(a.name);
  for (const auto& [activity, entries] : ir.activity_entries) {
    const auto path = "activity_entries." + activity;
    if (!declared.count(activity)) {
      throw ValidationError(path, "activity '" + activity +
                                      "' is not declared in the manifest");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!ids.count(entries[i])) {
        throw ValidationError(path + "[" + std::to_string(i) + "]",
                              "unknown method '" + entries[i] + "'");
      }
    }
  }
}

FeatureMap extractFeatureMap(const AppIR& ir) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < ir.methods.size(); ++i) index[ir.methods[i].id] = i;

  // callee -> callers
  std::vector<std::vector<std::size_t>> callers(ir.methods.size());
  for (const auto& e : ir.call_edges) {
    callers[index.at(e.callee)].push_back(index.at(e.caller));
  }
  // method -> activities that use it as an entry point
  std::vector<std::vector<const std::string*>> entry_of(ir.methods.size());
  for (const auto& [activity, entries] : ir.activity_entries) {
    for (const auto& m : entries) entry_of[index.at(m)].push_back(&activity);
  }

  FeatureMap out;
  for (const auto& a : ir.manifest) {
    out.activities.insert(a.name);
    if (a.rotatable) out.rotatable.insert(a.name);
  }

  for (std::size_t site = 0; site < ir.methods.size(); ++site) {
    const auto& calls = ir.methods[site].api_calls;
    if (calls.empty()) continue;

    // Backward BFS from the call site toward activity entries.
    std::set<const std::string*> reaching;
    std::vector<bool> seen(ir.methods.size(), false);
    std::deque<std::size_t> frontier{site};
    seen[site] = true;
    while (!frontier.empty()) {
      std::size_t m = frontier.front();
      frontier.pop_front();
      for (const auto* activity : entry_of[m]) reaching.insert(activity);
      for (std::size_t caller : callers[m]) {
        if (!seen[caller]) {
          seen[caller] = true;
          frontier.push_back(caller);
        }
      }
    }

    for (const auto& call : calls) {
      if (reaching.empty()) {
        out.app_level.insert(call.feature);
      } else {
        for (const auto* activity : reaching) {
          out.activity_level[*activity].insert(call.feature);
        }
      }
    }
  }
  return out;
}

std::set<ContextFeature> featuresForScreen(const FeatureMap& map,
                                           std::string_view activity,
                                           std::vector<std::string>* warnings) {
  std::set<ContextFeature> out = map.app_level;
  if (!map.activities.count(std::string(activity))) {
    if (warnings) {
      warnings->push_back("activity '" + std::string(activity) +
                          "' not in manifest; using app-level features only");
    }
    return out;
  }
  if (auto it = map.activity_level.find(std::string(activity));
      it != map.activity_level.end()) {
    out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

void to_json(Json& j, const FeatureMap& v) {
  Json activity_level = Json::object();
  for (const auto& [activity, features] : v.activity_level) {
    activity_level[activity] = features;
  }
  j = Json{{"activity_level", activity_level},
           {"app_level", v.app_level},
           {"rotatable", v.rotatable},
           {"activities", v.activities}};
}

void from_json(const Json& j, FeatureMap& v) {
  v = FeatureMap();
  for (auto it = j.at("activity_level").begin(); it != j.at("activity_level").end();
       ++it) {
    auto& set = v.activity_level[it.key()];
    for (const auto& f : it.value()) {
      set.insert(enumFromString<ContextFeature>(f.get<std::string>(), "feature"));
    }
  }
  for (const auto& f : j.at("app_level")) {
    v.app_level.insert(enumFromString<ContextFeature>(f.get<std::string>(), "feature"));
  }
  v.rotatable = j.at("rotatable").get<std::set<std::string>>();
  v.activities = j.value("activities", std::set<std::string>());
}

Json toJson(const AppIR& ir) {
  Json methods = Json::array();
  for (const auto& m : ir.methods) {
    Json calls = Json::array();
    for (const auto& c : m.api_calls) {
      calls.push_back(Json{{"api", c.api}, {"feature", c.feature}});
    }
    methods.push_back(Json{{"id", m.id}, {"class", m.class_name}, {"api_calls", calls}});
  }
  Json edges = Json::array();
  for (const auto& e : ir.call_edges) {
    edges.push_back(Json{{"caller", e.caller}, {"callee", e.callee}});
  }
  Json entries = Json::object();
  for (const auto& [a, ms] : ir.activity_entries) entries[a] = ms;
  Json manifest = Json::array();
  for (const auto& a : ir.manifest) {
    manifest.push_back(Json{{"name", a.name}, {"rotatable", a.rotatable}});
  }
  return Json{{"package", ir.package},
              {"methods", methods},
              {"call_edges", edges},
              {"activity_entries", entries},
              {"manifest", Json{{"activities", manifest}}}};
}

}  // namespace crashscope
