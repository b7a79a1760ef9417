#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "vicorpus/geometry.hpp"

namespace vicorpus::report {

using NodePath = std::vector<int>;

/// One wrapped character span as measured in the page.
struct CharRecord {
  std::string text;
  Rect rect;  // loose box, CSS pixels
  NodePath node_path;
  /// Path of the nearest block-level ancestor; the paragraph key.
  NodePath para_path;
  int dom_depth = 0;
  std::int64_t seq = 0;
  std::string font_family;
  double font_size_px = 0;
  bool is_whitespace = false;
};

enum class RegionKind { latex, image };

struct RegionRecord {
  Rect rect;
  RegionKind kind = RegionKind::image;
  NodePath node_path;
  NodePath para_path;
  std::int64_t seq = 0;
  std::string alt;
};

struct RemovalCounts {
  int pseudo = 0;
  int oversize = 0;
  int invisible = 0;
  int offscreen = 0;
  int placeholder = 0;
  int total() const { return pseudo + oversize + invisible + offscreen + placeholder; }
};

struct InstrumentationReport {
  std::string script_version;
  int page_width = 0;
  int page_height = 0;
  bool truncated = false;
  std::vector<CharRecord> chars;
  std::vector<RegionRecord> regions;
  /// paragraph key -> family
  std::map<std::string, std::string> font_assignment;
  RemovalCounts removed;
  std::vector<std::string> warnings;
};

/// "0/1/3" form of a node path; "" for the root.
std::string path_key(const NodePath& path);

std::string to_string(RegionKind kind);
RegionKind region_kind_from_string(const std::string& s);

/// Throws vicorpus::Error with the schema violations when `j` does not
/// conform to the report schema.
InstrumentationReport parse_report(const nlohmann::json& j);
nlohmann::json to_json(const InstrumentationReport& r);

/// Validates against the bundled report schema; returns the violations.
std::vector<std::string> schema_violations(const nlohmann::json& j);

/// Puts a raw report into the form the annotation builder expects: records
/// sorted by seq, chars that do not lie fully inside the page dropped (a
/// half-cut glyph cannot be annotated honestly), region rects clipped to the
/// page, zero-area records dropped. Returns the number of dropped records.
std::size_t normalize(InstrumentationReport& r, double tolerance_px = 0.5);

}  // namespace vicorpus::report
