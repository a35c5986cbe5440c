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

// Minimal JSON-Schema (draft-07 subset) validation for the shipped schemas.
// Supported keywords: $ref (local), type, enum, const, properties, required,
// additionalProperties, items, minItems, maxItems, uniqueItems, minLength,
// maxLength, pattern, minimum, maximum, allOf, anyOf, oneOf, not.

#include <string>
#include <string_view>
#include <vector>

#include "crashscope/domain.hpp"

namespace crashscope {

struct SchemaIssue {
  std::string path;  // e.g. "screens[0].components[2].bounds"
  std::string message;
};

// Raised when a document fails validation; what() carries the first issue.
class SchemaError : public Error {
 public:
  SchemaError(std::string schema, std::vector<SchemaIssue> issues);
  const std::vector<SchemaIssue>& issues() const { return issues_; }
  const std::string& path() const { return issues_.front().path; }

 private:
  std::vector<SchemaIssue> issues_;
};

class SchemaValidator {
 public:
  explicit SchemaValidator(Json schema);
  std::vector<SchemaIssue> validate(const Json& doc) const;
  const Json& root() const { return root_; }

 private:
  void check(const Json& schema, const Json& doc, const std::string& path,
             std::vector<SchemaIssue>& issues) const;
  const Json& resolve(std::string_view ref) const;

  Json root_;
};

// Names of the schemas compiled into the library: "app-model", "app-ir",
// "feature-map", "task", "trace", "crash", "graph", "report".
std::vector<std::string> builtinSchemaNames();
const Json& builtinSchema(std::string_view name);
std::vector<SchemaIssue> validateAgainst(std::string_view schema_name,
                                         const Json& doc);
// Throws SchemaError.
void requireValid(std::string_view schema_name, const Json& doc);

}  // namespace crashscope
