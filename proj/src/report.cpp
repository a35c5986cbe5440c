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

#include "crashscope/report.hpp"

#include <sstream>

namespace crashscope {

namespace {

struct FeatureText {
  const char* name;   // used in sentences
  const char* glyph;  // legend and badges
  const char* description;
};

constexpr FeatureText kFeatureText[] = {
    {"Network", "WiFi", "Network connectivity"},
    {"GPS", "GPS", "GPS location fix"},
    {"Accelerometer", "ACC", "Accelerometer reading"},
    {"Magnetometer", "MAG", "Magnetometer reading"},
    {"Temperature sensor", "TMP", "Ambient temperature reading"},
    {"Rotation", "ROT", "Screen orientation"},
};

const FeatureText& text(ContextFeature f) {
  return kFeatureText[static_cast<std::size_t>(f)];
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string htmlEscape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

// Inline SVG must not carry an XML declaration.
std::string_view inlineSvg(std::string_view svg) {
  if (svg.rfind("<?xml", 0) == 0) {
    auto end = svg.find("?>");
    if (end != std::string_view::npos) {
      svg.remove_prefix(end + 2);
      while (!svg.empty() && (svg.front() == '\n' || svg.front() == '\r')) {
        svg.remove_prefix(1);
      }
    }
  }
  return svg;
}

std::string placeholderSvg(const std::string& ref) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"270\" height=\"480\" "
         "viewBox=\"0 0 270 480\"><rect class=\"placeholder\" x=\"0\" y=\"0\" "
         "width=\"270\" height=\"480\" fill=\"#eee\" stroke=\"#999\"/>"
         "<text x=\"12\" y=\"240\" font-size=\"14\">screenshot unavailable: " +
         htmlEscape(ref) + "</text></svg>";
}

std::string pointerLabel(const ExecutionStep& step) {
  if (step.target_label && !step.target_label->empty()) return *step.target_label;
  if (step.event.target) return *step.event.target;
  const Point p = step.event.coordinates.value_or(Point{});
  return "the screen at (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

}  // namespace

std::string describeContextValue(ContextFeature f, ContextValue v) {
  if (v == ContextValue::Infeasible) {
    switch (f) {
      case ContextFeature::Gps: return "(91.0, 181.0)";
      case ContextFeature::Accelerometer: return "9999 m/s²";
      case ContextFeature::Magnetometer: return "99999 µT";
      case ContextFeature::Temperature: return "-999 °C";
      default: break;
    }
  }
  if (v == ContextValue::On || v == ContextValue::Off) return std::string(toString(v));
  return lower(toString(v));
}

std::string describeStep(const ExecutionStep& step) {
  const UiEvent& e = step.event;
  switch (e.action) {
    case Action::Tap:
      return "Tap on \"" + pointerLabel(step) + "\"";
    case Action::LongTap:
      return "Long-press \"" + pointerLabel(step) + "\"";
    case Action::Type:
      return "Enter \"" + e.text.value_or("") + "\" into the \"" + pointerLabel(step) +
             "\" field";
    case Action::Rotate:
      return "Rotate the device to " + lower(toString(step.context.orientation()));
    case Action::ContextSet: {
      const ContextFeature f = *e.context_feature;
      const ContextValue v = *e.context_value;
      if (f == ContextFeature::Network) {
        return std::string("Turn the Network ") + std::string(toString(v));
      }
      if (v == ContextValue::Infeasible) {
        return std::string("Set the ") + text(f).name + " to an infeasible value";
      }
      return std::string("Restore the ") + text(f).name + " to a normal value";
    }
    case Action::Launch:
      return "Launch the application";
    case Action::Back:
      return "Press the Back button";
  }
  return "Unknown event";
}

ReportDoc generateReport(const CrashRecord& crash, const ExecutionTrace& trace,
                         const ScreenshotLookup& screenshots) {
  if (trace.outcome != TraceOutcome::Crashed) {
    throw ContractViolation("report: trace " + trace.trace_id + " did not crash");
  }
  if (crash.trace_id != trace.trace_id) {
    throw ContractViolation("report: crash " + crash.crash_id + " belongs to trace " +
                            crash.trace_id + ", not " + trace.trace_id);
  }
  if (crash.crash_step_index < 1 ||
      crash.crash_step_index > static_cast<int>(trace.steps.size())) {
    throw ContractViolation("report: crash step index out of range");
  }

  ReportDoc doc;
  doc.crash_id = crash.crash_id;
  doc.trace_id = trace.trace_id;
  doc.task_id = crash.task_id;

  ReportGeneral& g = doc.general;
  g.app_name = trace.app_name;
  g.app_version = trace.app_version;
  g.app_package = crash.app_package;
  if (auto slash = crash.device.rfind('/'); slash != std::string::npos) {
    g.device = crash.device.substr(0, slash);
    g.os_version = crash.device.substr(slash + 1);
  } else {
    g.device = crash.device;
    g.os_version = "unknown";
    doc.warnings.push_back("device identification '" + crash.device +
                           "' carries no OS version");
  }
  g.orientation = crash.orientation;
  g.resolution = crash.resolution;
  for (ContextFeature f : kAllFeatures) {
    g.legend.push_back({f, text(f).glyph, text(f).description});
  }
  g.strategy = crash.strategy;
  g.signature = crash.signature;
  g.exception_type = crash.stack_trace.exception_type;
  g.message = crash.stack_trace.message;

  ContextState previous;
  for (int i = 0; i < crash.crash_step_index; ++i) {
    const ExecutionStep& s = trace.steps[static_cast<std::size_t>(i)];
    ReportStep step;
    step.index = i + 1;
    step.sentence = describeStep(s);
    step.navigation = s.navigation;
    for (ContextFeature f : kAllFeatures) {
      step.badges.push_back({f, s.context.get(f), s.context.get(f) != previous.get(f)});
    }
    previous = s.context;
    doc.steps.push_back(std::move(step));

    FlowImage img;
    img.index = i + 1;
    img.screenshot_ref = s.screenshot_ref;
    img.highlight = s.event.isPointer() ? s.event.target : std::nullopt;
    std::optional<std::string> svg =
        screenshots ? screenshots(s.screenshot_ref) : std::nullopt;
    if (svg) {
      img.svg = std::string(inlineSvg(*svg));
    } else {
      img.svg = placeholderSvg(s.screenshot_ref);
      img.placeholder = true;
      doc.warnings.push_back("missing screenshot " + s.screenshot_ref + " for step " +
                             std::to_string(i + 1));
    }
    doc.screen_flow.push_back(std::move(img));
  }

  doc.pruned_trace = pruneToApp(crash.stack_trace, crash.app_package);
  return doc;
}

// ---------------------------------------------------------------------------
// HTML

namespace {

constexpr const char* kStyle = R"(body{font-family:sans-serif;margin:2em;color:#222}
h1{font-size:1.6em}h2{border-bottom:1px solid #ccc;padding-bottom:.2em}
table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:.3em .6em;text-align:left}
ol.steps li{margin:.4em 0}.badge{display:inline-block;font-size:.75em;padding:0 .4em;margin-right:.2em;border:1px solid #999;border-radius:3px;color:#555}
.badge.changed{background:#ffe08a;border-color:#c90;color:#000}.nav{color:#888;font-size:.8em}
.flow{display:flex;flex-wrap:wrap;gap:1em}.flow figure{margin:0}.flow svg{width:216px;height:auto;border:1px solid #999}
pre.trace{background:#f4f4f4;padding:1em}.warnings{border:1px solid #c90;background:#fff8e0;padding:.5em 1em}
)";

}  // namespace

std::string renderHtml(const ReportDoc& doc) {
  const ReportGeneral& g = doc.general;
  std::ostringstream h;
  h << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
    << "<title>Crash report " << htmlEscape(doc.crash_id) << "</title>\n"
    << "<style>\n" << kStyle << "</style>\n</head>\n<body>\n";
  h << "<h1>" << htmlEscape(g.app_name) << " " << htmlEscape(g.app_version)
    << ": " << htmlEscape(g.exception_type) << "</h1>\n";

  if (!doc.warnings.empty()) {
    h << "<div class=\"warnings\"><strong>Warnings</strong><ul>\n";
    for (const auto& w : doc.warnings) h << "<li>" << htmlEscape(w) << "</li>\n";
    h << "</ul></div>\n";
  }

  h << "<section id=\"general\">\n<h2>1. General information</h2>\n<table>\n";
  auto row = [&](std::string_view k, const std::string& v) {
    h << "<tr><th>" << k << "</th><td>" << htmlEscape(v) << "</td></tr>\n";
  };
  row("Application", g.app_name + " " + g.app_version + " (" + g.app_package + ")");
  row("OS version", g.os_version);
  row("Device", g.device);
  row("Orientation at crash", lower(toString(g.orientation)));
  row("Resolution at crash", g.resolution.str());
  row("Strategy", g.strategy.name());
  row("Exception", g.exception_type + (g.message.empty() ? "" : ": " + g.message));
  row("Signature", g.signature);
  h << "</table>\n<h3>Context legend</h3>\n<table class=\"legend\">\n";
  for (const auto& l : g.legend) {
    h << "<tr><td><span class=\"badge\">" << htmlEscape(l.glyph) << "</span></td><td>"
      << htmlEscape(l.description) << "</td></tr>\n";
  }
  h << "</table>\n</section>\n";

  h << "<section id=\"steps\">\n<h2>2. Steps to reproduce</h2>\n<ol class=\"steps\">\n";
  for (const auto& s : doc.steps) {
    h << "<li>" << htmlEscape(s.sentence);
    if (s.navigation) h << " <span class=\"nav\">(navigation)</span>";
    h << "<br>";
    for (const auto& b : s.badges) {
      h << "<span class=\"badge" << (b.changed ? " changed" : "") << "\">"
        << htmlEscape(text(b.feature).glyph) << " "
        << htmlEscape(describeContextValue(b.feature, b.value)) << "</span>";
    }
    h << "</li>\n";
  }
  h << "</ol>\n</section>\n";

  h << "<section id=\"screen-flow\">\n<h2>3. Screen flow</h2>\n<div class=\"flow\">\n";
  for (const auto& f : doc.screen_flow) {
    h << "<figure>" << f.svg << "<figcaption>Step " << f.index << "</figcaption></figure>\n";
  }
  h << "</div>\n</section>\n";

  h << "<section id=\"stack-trace\">\n<h2>4. Stack trace</h2>\n<pre class=\"trace\">"
    << htmlEscape(formatStackTrace(doc.pruned_trace)) << "</pre>\n</section>\n";
  h << "</body>\n</html>\n";
  return h.str();
}

// ---------------------------------------------------------------------------
// JSON

void to_json(Json& j, const ReportDoc& d) {
  const ReportGeneral& g = d.general;
  Json legend = Json::array();
  for (const auto& l : g.legend) {
    legend.push_back({{"feature", l.feature}, {"glyph", l.glyph}, {"description", l.description}});
  }
  Json steps = Json::array();
  for (const auto& s : d.steps) {
    Json badges = Json::array();
    for (const auto& b : s.badges) {
      badges.push_back({{"feature", b.feature}, {"value", b.value}, {"changed", b.changed}});
    }
    steps.push_back({{"index", s.index},
                     {"sentence", s.sentence},
                     {"badges", badges},
                     {"navigation", s.navigation}});
  }
  Json flow = Json::array();
  for (const auto& f : d.screen_flow) {
    Json img{{"index", f.index},
             {"screenshot_ref", f.screenshot_ref},
             {"svg", f.svg},
             {"placeholder", f.placeholder}};
    if (f.highlight) img["highlight"] = *f.highlight;
    flow.push_back(std::move(img));
  }
  j = Json{{"crash_id", d.crash_id},
           {"trace_id", d.trace_id},
           {"task_id", d.task_id},
           {"general",
            {{"app_name", g.app_name},
             {"app_version", g.app_version},
             {"app_package", g.app_package},
             {"os_version", g.os_version},
             {"device", g.device},
             {"orientation", g.orientation},
             {"resolution", g.resolution},
             {"legend", legend},
             {"strategy", g.strategy},
             {"signature", g.signature},
             {"exception_type", g.exception_type},
             {"message", g.message}}},
           {"steps", steps},
           {"screen_flow", flow},
           {"pruned_trace", d.pruned_trace},
           {"warnings", d.warnings}};
}

void from_json(const Json& j, ReportDoc& d) {
  d = ReportDoc();
  d.crash_id = j.at("crash_id").get<std::string>();
  d.trace_id = j.at("trace_id").get<std::string>();
  d.task_id = j.at("task_id").get<std::string>();
  const Json& g = j.at("general");
  ReportGeneral& o = d.general;
  o.app_name = g.at("app_name").get<std::string>();
  o.app_version = g.at("app_version").get<std::string>();
  o.app_package = g.at("app_package").get<std::string>();
  o.os_version = g.at("os_version").get<std::string>();
  o.device = g.at("device").get<std::string>();
  o.orientation = g.at("orientation").get<Orientation>();
  o.resolution = g.at("resolution").get<Resolution>();
  for (const auto& l : g.at("legend")) {
    o.legend.push_back({l.at("feature").get<ContextFeature>(),
                        l.at("glyph").get<std::string>(),
                        l.at("description").get<std::string>()});
  }
  o.strategy = g.at("strategy").get<StrategyConfig>();
  o.signature = g.at("signature").get<std::string>();
  o.exception_type = g.at("exception_type").get<std::string>();
  o.message = g.at("message").get<std::string>();
  for (const auto& s : j.at("steps")) {
    ReportStep step;
    step.index = s.at("index").get<int>();
    step.sentence = s.at("sentence").get<std::string>();
    step.navigation = s.at("navigation").get<bool>();
    for (const auto& b : s.at("badges")) {
      step.badges.push_back({b.at("feature").get<ContextFeature>(),
                             b.at("value").get<ContextValue>(),
                             b.at("changed").get<bool>()});
    }
    d.steps.push_back(std::move(step));
  }
  for (const auto& f : j.at("screen_flow")) {
    FlowImage img;
    img.index = f.at("index").get<int>();
    img.screenshot_ref = f.at("screenshot_ref").get<std::string>();
    if (f.contains("highlight")) img.highlight = f["highlight"].get<std::string>();
    img.svg = f.at("svg").get<std::string>();
    img.placeholder = f.at("placeholder").get<bool>();
    d.screen_flow.push_back(std::move(img));
  }
  d.pruned_trace = j.at("pruned_trace").get<StackTrace>();
  d.warnings = j.at("warnings").get<std::vector<std::string>>();
}

}  // namespace crashscope
