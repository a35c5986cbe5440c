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

#include "crashscope/simulator.hpp"
#include "support.hpp"

namespace crashscope {
namespace {

using testing::dataModel;
using testing::fixturesDir;
using testing::readJson;

std::shared_ptr<const AppModel> fixtureModel(const std::string& name) {
  return std::make_shared<const AppModel>(
      loadAppModelFile(fixturesDir() / (name + ".model.json")));
}

UiEvent tapOn(const ScreenState& s, const std::string& id) {
  return UiEvent::tap(id, componentCenter(s.find(id)->bounds));
}

std::vector<std::string> ids(const ScreenState& s) {
  std::vector<std::string> out;
  for (const auto& c : s.components) out.push_back(c.id);
  return out;
}

// ---------------------------------------------------------------------------
// Loading

TEST(AppModelLoad, HandCountedFixture) {
  const auto m = fixtureModel("two_screen_login");
  EXPECT_EQ(m->screens.size(), 2u);
  EXPECT_EQ(m->transitions.size(), 1u);
  EXPECT_EQ(m->crash_rules.size(), 1u);
  EXPECT_EQ(m->initial_screen, "login");
}

TEST(AppModelLoad, MinimalDocument) {
  const AppModel m = loadAppModel(R"({
    "app": {"id": "tiny", "name": "Tiny", "version": "1", "package": "com.t"},
    "activities": [{"name": "Main"}],
    "screens": [{"id": "s", "activity": "Main", "initial": true, "components": [
      {"id": "b", "kind": "BUTTON", "label": "B", "clickable": true,
       "bounds": {"left": 0, "top": 0, "right": 10, "bottom": 10}}]}],
    "transitions": [], "crash_rules": []})");
  EXPECT_EQ(m.screens.size(), 1u);
  EXPECT_TRUE(m.transitions.empty());
}

std::string loadError(const Json& doc) {
  try {
    appModelFromJson(doc);
  } catch (const ModelError& e) {
    return e.path() + ": " + e.message();
  }
  return "<loaded>";
}

TEST(AppModelLoad, DanglingReferenceNamesTheRule) {
  Json doc = readJson(fixturesDir() / "two_screen_login.model.json");
  doc["transitions"][0]["to"] = "nowhere";
  EXPECT_EQ(loadError(doc), "transitions[0].to: unknown screen 'nowhere'");
}

TEST(AppModelLoad, DuplicateInitialScreen) {
  Json doc = readJson(fixturesDir() / "two_screen_login.model.json");
  doc["screens"][1]["initial"] = true;
  EXPECT_EQ(loadError(doc).rfind("screens[1].initial: ", 0), 0u) << loadError(doc);
}

TEST(AppModelLoad, SchemaViolationCarriesPath) {
  Json doc = readJson(fixturesDir() / "two_screen_login.model.json");
  doc["screens"][0]["components"][3].erase("bounds");
  EXPECT_EQ(loadError(doc).rfind("screens[0].components[3]", 0), 0u) << loadError(doc);
}

TEST(AppModelLoad, ComponentOutsideScreen) {
  Json doc = readJson(fixturesDir() / "two_screen_login.model.json");
  doc["screens"][0]["components"][3]["bounds"]["right"] = 5000;
  EXPECT_EQ(loadError(doc).rfind("screens[0].components[3].bounds: ", 0), 0u) << loadError(doc);
}

// ---------------------------------------------------------------------------
// Sessions

TEST(Simulator, LaunchState) {
  const auto m = fixtureModel("two_screen_login");
  auto a = launch(m);
  auto b = launch(m);
  const ScreenState s = a->queryHierarchy();
  EXPECT_EQ(s.activity, "LoginActivity");
  EXPECT_EQ(ids(s), (std::vector<std::string>{"title", "user_field", "pass_field", "login_btn"}));
  EXPECT_EQ(s, b->queryHierarchy());
  EXPECT_FALSE(a->crashDialogVisible());
  EXPECT_EQ(a->context(), ContextState{});
  EXPECT_TRUE(a->drainExceptionLog().empty());
}

TEST(Simulator, GuardedTransitionAndCrash) {
  const auto m = fixtureModel("two_screen_login");
  auto d = launch(m);
  ScreenState s = d->queryHierarchy();
  ASSERT_EQ(d->executeEvent(tapOn(s, "login_btn")), EventResult::Crashed);
  EXPECT_TRUE(d->crashDialogVisible());
  EXPECT_THROW(d->queryHierarchy(), DeviceError);
  EXPECT_THROW(d->executeEvent(tapOn(s, "login_btn")), DeviceError);
  const auto log = d->drainExceptionLog();
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].exception_type, "java.lang.NullPointerException");
  EXPECT_TRUE(d->drainExceptionLog().empty());

  d->resetApp();
  EXPECT_FALSE(d->crashDialogVisible());
  s = d->queryHierarchy();
  EXPECT_EQ(s, launch(m)->queryHierarchy());
  const GuiComponent* user = s.find("user_field");
  ASSERT_EQ(d->executeEvent(UiEvent::type("user_field", componentCenter(user->bounds), "bob")),
            EventResult::Ok);
  ASSERT_EQ(d->executeEvent(tapOn(s, "login_btn")), EventResult::Ok);
  EXPECT_EQ(d->queryHierarchy().activity, "HomeActivity");
}

TEST(Simulator, TapOnNothingHasNoEffect) {
  auto d = launch(fixtureModel("two_screen_login"));
  EXPECT_EQ(d->executeEvent(UiEvent::tap("title", {5, 1900})), EventResult::NoEffect);
  EXPECT_THROW(d->executeEvent(UiEvent::tap("title", {5, 5000})), DeviceError);
}

TEST(Simulator, CrashRulesDominateTransitions) {
  auto d = launch(dataModel("overlap"));
  const ScreenState s = d->queryHierarchy();
  EXPECT_EQ(d->executeEvent(tapOn(s, "go_btn")), EventResult::Crashed);
  d->resetApp();
  EXPECT_EQ(d->queryHierarchy(), s);
}

TEST(Simulator, ContextSetCanCrash) {
  auto d = launch(fixtureModel("sensor_dashboard"));
  const ScreenState s = d->queryHierarchy();
  ASSERT_EQ(d->executeEvent(tapOn(s, "thermo_btn")), EventResult::Ok);
  EXPECT_EQ(d->executeEvent(UiEvent::contextSet(ContextFeature::Temperature,
                                                ContextValue::Infeasible)),
            EventResult::Crashed);
}

TEST(Simulator, SilentRuleLogsWithoutDialog) {
  auto d = launch(fixtureModel("sensor_dashboard"));
  ASSERT_EQ(d->executeEvent(tapOn(d->queryHierarchy(), "thermo_btn")), EventResult::Ok);
  d->executeEvent(tapOn(d->queryHierarchy(), "calibrate_btn"));
  EXPECT_FALSE(d->crashDialogVisible());
  EXPECT_EQ(d->drainExceptionLog().size(), 1u);
}

TEST(Simulator, ResetRestoresContextButKeepsLog) {
  Json doc = readJson(testing::dataDir() / "linear3.model.json");
  doc["activities"][0]["rotatable"] = true;
  auto d = launch(std::make_shared<const AppModel>(appModelFromJson(doc)));
  d->executeEvent(UiEvent::contextSet(ContextFeature::Network, ContextValue::Off));
  ASSERT_EQ(d->executeEvent(UiEvent::rotate()), EventResult::Ok);
  EXPECT_EQ(d->resolution(), (Resolution{1920, 1080}));
  EXPECT_EQ(d->queryHierarchy().orientation, Orientation::Landscape);
  d->resetApp();
  EXPECT_EQ(d->context(), ContextState{});
  EXPECT_EQ(d->resolution(), (Resolution{1080, 1920}));

  auto g = launch(fixtureModel("two_screen_login"));
  g->executeEvent(tapOn(g->queryHierarchy(), "login_btn"));
  g->resetApp();
  EXPECT_EQ(g->drainExceptionLog().size(), 1u);
}

TEST(Simulator, RotationLockedActivityIgnoresRotate) {
  auto d = launch(dataModel("linear3"));
  EXPECT_EQ(d->executeEvent(UiEvent::rotate()), EventResult::NoEffect);
  EXPECT_EQ(d->context().orientation(), Orientation::Portrait);
}

TEST(Simulator, OneShotTransitionSurvivesReset) {
  auto d = launch(dataModel("one_shot"));
  const ScreenState start = d->queryHierarchy();
  ASSERT_EQ(d->executeEvent(tapOn(start, "promo_btn")), EventResult::Ok);
  EXPECT_EQ(d->queryHierarchy().activity, "PromoActivity");
  d->resetApp();
  EXPECT_EQ(d->executeEvent(tapOn(start, "promo_btn")), EventResult::NoEffect);
  EXPECT_EQ(d->queryHierarchy(), start);
}

TEST(Simulator, Screenshots) {
  auto d = launch(fixtureModel("two_screen_login"));
  const std::string plain = d->screenshot();
  EXPECT_EQ(plain, d->screenshot());
  EXPECT_EQ(plain.find("class=\"highlight\""), std::string::npos);

  const std::string hl = d->screenshot("login_btn");
  std::size_t count = 0;
  for (auto p = hl.find("class=\"highlight\""); p != std::string::npos;
       p = hl.find("class=\"highlight\"", p + 1)) {
    ++count;
  }
  EXPECT_EQ(count, 1u);
  EXPECT_NE(hl.find("class=\"highlight\" x=\"90\" y=\"660\""), std::string::npos);

  d->executeEvent(tapOn(d->queryHierarchy(), "login_btn"));
  EXPECT_NE(d->screenshot().find("class=\"crash-dialog\""), std::string::npos);
}

TEST(Simulator, DeterministicAcrossSessions) {
  const auto m = fixtureModel("expense_tracker");
  auto a = launch(m);
  auto b = launch(m);
  for (int i = 0; i < 30; ++i) {
    const ScreenState sa = a->queryHierarchy();
    ASSERT_EQ(sa, b->queryHierarchy());
    ASSERT_EQ(a->screenshot(), b->screenshot());
    const GuiComponent* target = nullptr;
    for (const auto& c : sa.components) {
      if (c.clickable && (!target || (i % 3 == 0))) target = &c;
    }
    if (!target) break;
    const UiEvent e = tapOn(sa, target->id);
    const EventResult ra = a->executeEvent(e);
    ASSERT_EQ(ra, b->executeEvent(e));
    ASSERT_EQ(a->drainExceptionLog(), b->drainExceptionLog());
    if (ra == EventResult::Crashed) {
      a->resetApp();
      b->resetApp();
    }
  }
}

TEST(Simulator, ExceptionNoiseDependsOnPid) {
  const auto m = fixtureModel("two_screen_login");
  auto a = launch(m, SessionOptions{100, 1700000000});
  auto b = launch(m, SessionOptions{200, 1700000500});
  const UiEvent e = tapOn(a->queryHierarchy(), "login_btn");
  a->executeEvent(e);
  b->executeEvent(e);
  const auto la = a->drainExceptionLog();
  const auto lb = b->drainExceptionLog();
  ASSERT_EQ(la.size(), 1u);
  ASSERT_EQ(lb.size(), 1u);
  EXPECT_NE(la[0], lb[0]);
  EXPECT_EQ(normalizeStackTrace(la[0]), normalizeStackTrace(lb[0]));
  EXPECT_EQ(crashSignature(la[0], m->app.package), crashSignature(lb[0], m->app.package));
}

}  // namespace
}  // namespace crashscope
