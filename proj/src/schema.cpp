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

#include "crashscope/schema.hpp"

#include <map>
#include <mutex>
#include <regex>
#include <set>

#include "schemas_embedded.hpp"

namespace crashscope {
namespace {

std::string describe(const Json& v) {
  switch (v.type()) {
    case Json::value_t::object:
      return "object";
    case Json::value_t::array:
      return "array";
    case Json::value_t::string:
      return "string";
    case Json::value_t::boolean:
      return "boolean";
    case Json::value_t::null:
      return "null";
    case Json::value_t::number_float:
      return "number";
    default:
      return "integer";
  }
}

bool hasType(const Json& v, std::string_view type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (v.is_number_float()) {
      double d = v.get<double>();
      return d == static_cast<double>(static_cast<long long>(d));
    }
    return false;
  }
  return false;
}

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

std::string shown(const std::string& path) {
  return path.empty() ? "(root)" : path;
}

}  // namespace

SchemaError::SchemaError(std::string schema, std::vector<SchemaIssue> issues)
    : Error(schema + ": " + shown(issues.front().path) + ": " +
            issues.front().message),
      issues_(std::move(issues)) {}

SchemaValidator::SchemaValidator(Json schema) : root_(std::move(schema)) {}

std::vector<SchemaIssue> SchemaValidator::validate(const Json& doc) const {
  std::vector<SchemaIssue> issues;
  check(root_, doc, "", issues);
  return issues;
}

const Json& SchemaValidator::resolve(std::string_view ref) const {
  if (ref.rfind("#/", 0) != 0) {
    throw ContractViolation("only local $ref supported: " + std::string(ref));
  }
  const Json* node = &root_;
  std::string_view rest = ref.substr(2);
  while (!rest.empty()) {
    auto slash = rest.find('/');
    std::string key(rest.substr(0, slash));
    node = &node->at(key);
    rest = slash == std::string_view::npos ? std::string_view{}
                                           : rest.substr(slash + 1);
  }
  return *node;
}

void SchemaValidator::check(const Json& schema, const Json& doc,
                            const std::string& path,
                            std::vector<SchemaIssue>& issues) const {
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) issues.push_back({path, "not allowed"});
    return;
  }
  if (auto it = schema.find("$ref"); it != schema.end()) {
    check(resolve(it->get<std::string>()), doc, path, issues);
    return;
  }
  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    std::string expected;
    if (it->is_string()) {
      expected = it->get<std::string>();
      ok = hasType(doc, expected);
    } else {
      for (const auto& t : *it) {
        expected += (expected.empty() ? "" : "|") + t.get<std::string>();
        ok = ok || hasType(doc, t.get<std::string>());
      }
    }
    if (!ok) {
      issues.push_back({path, "expected " + expected + ", got " + describe(doc)});
      return;
    }
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    bool found = false;
    for (const auto& v : *it) found = found || v == doc;
    if (!found) issues.push_back({path, "value " + doc.dump() + " not in " + it->dump()});
  }
  if (auto it = schema.find("const"); it != schema.end() && *it != doc) {
    issues.push_back({path, "expected constant " + it->dump()});
  }

  if (doc.is_string()) {
    const auto& s = doc.get_ref<const std::string&>();
    if (auto it = schema.find("minLength");
        it != schema.end() && s.size() < it->get<std::size_t>()) {
      issues.push_back({path, "shorter than " + it->dump() + " characters"});
    }
    if (auto it = schema.find("maxLength");
        it != schema.end() && s.size() > it->get<std::size_t>()) {
      issues.push_back({path, "longer than " + it->dump() + " characters"});
    }
    if (auto it = schema.find("pattern"); it != schema.end()) {
      std::regex re(it->get<std::string>());
      if (!std::regex_search(s, re)) {
        issues.push_back({path, "does not match pattern " + it->dump()});
      }
    }
  }
  if (doc.is_number()) {
    double d = doc.get<double>();
    if (auto it = schema.find("minimum");
        it != schema.end() && d < it->get<double>()) {
      issues.push_back({path, "less than minimum " + it->dump()});
    }
    if (auto it = schema.find("maximum");
        it != schema.end() && d > it->get<double>()) {
      issues.push_back({path, "greater than maximum " + it->dump()});
    }
  }
  if (doc.is_array()) {
    if (auto it = schema.find("minItems");
        it != schema.end() && doc.size() < it->get<std::size_t>()) {
      issues.push_back({path, "fewer than " + it->dump() + " items"});
    }
    if (auto it = schema.find("maxItems");
        it != schema.end() && doc.size() > it->get<std::size_t>()) {
      issues.push_back({path, "more than " + it->dump() + " items"});
    }
    if (schema.value("uniqueItems", false)) {
      std::set<std::string> seen;
      for (std::size_t i = 0; i < doc.size(); ++i) {
        if (!seen.insert(doc[i].dump()).second) {
          issues.push_back({index(path, i), "duplicate item"});
        }
      }
    }
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        check(*it, doc[i], index(path, i), issues);
      }
    }
  }
  if (doc.is_object()) {
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& key : *it) {
        if (!doc.contains(key.get<std::string>())) {
          issues.push_back({child(path, key.get<std::string>()),
                            "required property missing"});
        }
      }
    }
    const Json* props = nullptr;
    if (auto it = schema.find("properties"); it != schema.end()) props = &*it;
    const auto additional = schema.find("additionalProperties");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (props && props->contains(it.key())) {
        check(props->at(it.key()), it.value(), child(path, it.key()), issues);
      } else if (additional != schema.end()) {
        if (additional->is_boolean() && !additional->get<bool>()) {
          issues.push_back({child(path, it.key()), "unknown property"});
        } else if (additional->is_object()) {
          check(*additional, it.value(), child(path, it.key()), issues);
        }
      }
    }
  }

  if (auto it = schema.find("allOf"); it != schema.end()) {
    for (const auto& sub : *it) check(sub, doc, path, issues);
  }
  if (auto it = schema.find("anyOf"); it != schema.end()) {
    bool any = false;
    for (const auto& sub : *it) {
      std::vector<SchemaIssue> scratch;
      check(sub, doc, path, scratch);
      any = any || scratch.empty();
    }
    if (!any) issues.push_back({path, "does not match any allowed form"});
  }
  if (auto it = schema.find("oneOf"); it != schema.end()) {
    int matches = 0;
    std::vector<SchemaIssue> closest;
    for (const auto& sub : *it) {
      std::vector<SchemaIssue> scratch;
      check(sub, doc, path, scratch);
      if (scratch.empty()) {
        ++matches;
      } else if (closest.empty() || scratch.size() < closest.size()) {
        closest = std::move(scratch);
      }
    }
    if (matches == 0) {
      // Report the alternative that came closest; its paths are the most
      // useful to a fixture author.
      issues.insert(issues.end(), closest.begin(), closest.end());
    } else if (matches > 1) {
      issues.push_back({path, "matches more than one allowed form"});
    }
  }
  if (auto it = schema.find("not"); it != schema.end()) {
    std::vector<SchemaIssue> scratch;
    check(*it, doc, path, scratch);
    if (scratch.empty()) issues.push_back({path, "matches a forbidden form"});
  }
}

std::vector<std::string> builtinSchemaNames() {
  std::vector<std::string> names;
  for (const auto& s : embedded::kSchemas) names.emplace_back(s.name);
  return names;
}

namespace {

const SchemaValidator& builtinValidator(std::string_view name) {
  static std::mutex mu;
  static std::map<std::string, SchemaValidator, std::less<>> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  for (const auto& s : embedded::kSchemas) {
    if (s.name == name) {
      return cache
          .emplace(std::string(name), SchemaValidator(Json::parse(s.text)))
          .first->second;
    }
  }
  throw ContractViolation("unknown schema '" + std::string(name) + "'");
}

}  // namespace

const Json& builtinSchema(std::string_view name) {
  return builtinValidator(name).root();
}

std::vector<SchemaIssue> validateAgainst(std::string_view schema_name,
                                         const Json& doc) {
  return builtinValidator(schema_name).validate(doc);
}

void requireValid(std::string_view schema_name, const Json& doc) {
  auto issues = validateAgainst(schema_name, doc);
  if (!issues.empty()) {
    throw SchemaError(std::string(schema_name), std::move(issues));
  }
}

}  // namespace crashscope
