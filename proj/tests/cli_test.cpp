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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>

#include "crashscope/domain.hpp"
#include "support.hpp"

namespace crashscope {
namespace {

using testing::fixturesDir;
using testing::TempDir;

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string(CRASHSCOPE_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string app(const std::string& name) {
  const auto base = fixturesDir() / name;
  return base.string() + ".model.json " + base.string() + ".ir.json " + base.string() +
         ".manifest.json";
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("explore").code, 2);
  EXPECT_EQ(cli("explore " + app("two_screen_login") + " --strategy TOP_DOWN").code, 2);
}

TEST(Cli, BadInputExitsOne) {
  TempDir dir;
  std::ofstream(dir / "broken.model.json") << "{";
  std::ofstream(dir / "broken.ir.json") << "{}";
  const auto base = (dir / "broken").string();
  EXPECT_EQ(cli("explore " + base + ".model.json " + base + ".ir.json --all").code, 1);
}

TEST(Cli, AnalyzeJson) {
  const CliRun r = cli("--json analyze " + (fixturesDir() / "weather_network.ir.json").string());
  ASSERT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["activity_level"]["ForecastActivity"], Json::array({"NETWORK"}));
}

TEST(Cli, ExploreListsCrashesStably) {
  const CliRun a = cli("explore " + app("two_screen_login") + " --all --seed 0");
  const CliRun b = cli("explore " + app("two_screen_login") + " --all --seed 0");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("empty_user"), std::string::npos) << a.out;
  EXPECT_NE(a.out.find("SIGNATURE"), std::string::npos);

  const CliRun j = cli("--json explore " + app("two_screen_login") + " --all --seed 0");
  ASSERT_EQ(j.code, 0);
  const Json doc = Json::parse(j.out);
  EXPECT_EQ(doc["strategies"].size(), 12u);
  EXPECT_FALSE(doc["crashes"].empty());
}

TEST(Cli, ExplorePersistsAndReplays) {
  TempDir dir;
  const std::string store = (dir / "store").string();
  ASSERT_EQ(cli("explore " + app("weather_network") + " --all --out " + store).code, 0);
  std::string crash_id;
  for (const auto& e : std::filesystem::directory_iterator(dir / "store" / "scripts")) {
    if (e.path().extension() == ".cscript") crash_id = e.path().stem().string();
  }
  ASSERT_FALSE(crash_id.empty());

  const auto script = (dir / "store" / "scripts" / (crash_id + ".cscript")).string();
  const CliRun replay =
      cli("replay " + script + " " + (fixturesDir() / "weather_network.model.json").string());
  EXPECT_EQ(replay.code, 0);
  EXPECT_EQ(replay.out.rfind("REPRODUCED ", 0), 0u) << replay.out;

  const CliRun other =
      cli("replay " + script + " " + (fixturesDir() / "two_screen_login.model.json").string());
  EXPECT_NE(other.code, 0);

  const auto html = (dir / "r.html").string();
  const CliRun report = cli("report " + crash_id + " --store " + store + " --out " + html);
  EXPECT_EQ(report.code, 0);
  EXPECT_TRUE(std::filesystem::exists(html));
  EXPECT_EQ(cli("report no-such-crash --store " + store).code, 1);
}

TEST(Cli, CorpusRun) {
  const CliRun r = cli("corpus run " + fixturesDir().string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("corpus ok"), std::string::npos);
}

}  // namespace
}  // namespace crashscope
