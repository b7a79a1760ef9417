#include "vicorpus/report.hpp"

#include <algorithm>

#include "vicorpus/error.hpp"
#include "vicorpus/json_schema.hpp"
#include "vicorpus/resources.hpp"

using nlohmann::json;

namespace vicorpus::report {

namespace {

const JsonSchema& report_schema() {
  static const JsonSchema schema(json::parse(resources::report_schema()));
  return schema;
}

Rect rect_from(const json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(), j.at("h").get<double>()};
}

json rect_to(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

}  // namespace

std::string path_key(const NodePath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out.push_back('/');
    out += std::to_string(path[i]);
  }
  return out;
}

std::string to_string(RegionKind kind) { return kind == RegionKind::latex ? "latex" : "image"; }

RegionKind region_kind_from_string(const std::string& s) {
  if (s == "latex") return RegionKind::latex;
  if (s == "image") return RegionKind::image;
  throw Error("unknown region kind: " + s);
}

std::vector<std::string> schema_violations(const json& j) { return report_schema().validate(j); }

InstrumentationReport parse_report(const json& j) {
  if (auto errors = schema_violations(j); !errors.empty()) {
    std::string msg = "instrumentation report violates schema:";
    for (std::size_t i = 0; i < errors.size() && i < 5; ++i) msg += "\n  " + errors[i];
    if (errors.size() > 5) msg += "\n  ... " + std::to_string(errors.size() - 5) + " more";
    throw Error(msg);
  }
  InstrumentationReport r;
  r.script_version = j.at("script_version").get<std::string>();
  r.page_width = j.at("page_width").get<int>();
  r.page_height = j.at("page_height").get<int>();
  r.truncated = j.value("truncated", false);
  r.chars.reserve(j.at("chars").size());
  for (const auto& c : j.at("chars")) {
    CharRecord rec;
    rec.text = c.at("text").get<std::string>();
    rec.rect = rect_from(c.at("rect"));
    rec.node_path = c.at("node_path").get<NodePath>();
    rec.para_path = c.at("para_path").get<NodePath>();
    rec.dom_depth = c.at("dom_depth").get<int>();
    rec.seq = c.at("seq").get<std::int64_t>();
    rec.font_family = c.at("font_family").get<std::string>();
    rec.font_size_px = c.at("font_size_px").get<double>();
    rec.is_whitespace = c.at("is_whitespace").get<bool>();
    r.chars.push_back(std::move(rec));
  }
  for (const auto& g : j.at("regions")) {
    RegionRecord rec;
    rec.rect = rect_from(g.at("rect"));
    rec.kind = region_kind_from_string(g.at("kind").get<std::string>());
    rec.node_path = g.at("node_path").get<NodePath>();
    rec.para_path = g.at("para_path").get<NodePath>();
    rec.seq = g.at("seq").get<std::int64_t>();
    rec.alt = g.value("alt", "");
    r.regions.push_back(std::move(rec));
  }
  r.font_assignment = j.at("font_assignment").get<std::map<std::string, std::string>>();
  const auto& rm = j.at("removed");
  r.removed = {rm.at("pseudo").get<int>(), rm.at("oversize").get<int>(), rm.at("invisible").get<int>(),
               rm.at("offscreen").get<int>(), rm.at("placeholder").get<int>()};
  if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
  return r;
}

json to_json(const InstrumentationReport& r) {
  json chars = json::array();
  for (const auto& c : r.chars) {
    chars.push_back({{"text", c.text},
                     {"rect", rect_to(c.rect)},
                     {"node_path", c.node_path},
                     {"para_path", c.para_path},
                     {"dom_depth", c.dom_depth},
                     {"seq", c.seq},
                     {"font_family", c.font_family},
                     {"font_size_px", c.font_size_px},
                     {"is_whitespace", c.is_whitespace}});
  }
  json regions = json::array();
  for (const auto& g : r.regions) {
    regions.push_back({{"rect", rect_to(g.rect)},
                       {"kind", to_string(g.kind)},
                       {"node_path", g.node_path},
                       {"para_path", g.para_path},
                       {"seq", g.seq},
                       {"alt", g.alt}});
  }
  return {{"script_version", r.script_version},
          {"page_width", r.page_width},
          {"page_height", r.page_height},
          {"truncated", r.truncated},
          {"chars", std::move(chars)},
          {"regions", std::move(regions)},
          {"font_assignment", r.font_assignment},
          {"removed",
           {{"pseudo", r.removed.pseudo},
            {"oversize", r.removed.oversize},
            {"invisible", r.removed.invisible},
            {"offscreen", r.removed.offscreen},
            {"placeholder", r.removed.placeholder}}},
          {"warnings", r.warnings}};
}

std::size_t normalize(InstrumentationReport& r, double tolerance_px) {
  const Rect page{0, 0, static_cast<double>(r.page_width), static_cast<double>(r.page_height)};
  const std::size_t before = r.chars.size() + r.regions.size();

  std::stable_sort(r.chars.begin(), r.chars.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });
  std::stable_sort(r.regions.begin(), r.regions.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });

  std::erase_if(r.chars, [&](CharRecord& c) {
    if (c.rect.empty()) return true;
    const bool inside = c.rect.left() >= -tolerance_px && c.rect.top() >= -tolerance_px &&
                        c.rect.right() <= page.right() + tolerance_px && c.rect.bottom() <= page.bottom() + tolerance_px;
    if (!inside) return true;
    c.rect = intersection(c.rect, page);  // absorbs sub-pixel spill
    return c.rect.empty();
  });
  std::erase_if(r.regions, [&](RegionRecord& g) {
    g.rect = intersection(g.rect, page);
    return g.rect.empty();
  });
  return before - r.chars.size() - r.regions.size();
}

}  // namespace vicorpus::report
