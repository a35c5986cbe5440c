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

// Paths and small helpers shared by the test binaries.

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "crashscope/pipeline.hpp"

namespace crashscope::testing {

inline std::filesystem::path sourceDir() { return CRASHSCOPE_SOURCE_DIR; }
inline std::filesystem::path fixturesDir() { return sourceDir() / "fixtures"; }
inline std::filesystem::path dataDir() { return sourceDir() / "tests" / "data"; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json readJson(const std::filesystem::path& p) { return Json::parse(slurp(p)); }

inline LoadedApp fixture(const std::string& name) {
  return loadAppFiles(fixturesDir() / (name + ".model.json"),
                      fixturesDir() / (name + ".ir.json"));
}

inline std::shared_ptr<const AppModel> dataModel(const std::string& name) {
  return std::make_shared<const AppModel>(
      loadAppModelFile(dataDir() / (name + ".model.json")));
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("crashscope-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace crashscope::testing
