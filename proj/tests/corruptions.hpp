#pragma once

// Seeded damage to a finished corpus. Each function breaks exactly one
// thing the validator is expected to notice.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vicorpus/dataset.hpp"
#include "vicorpus/image.hpp"

namespace corrupt {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Kind { out_of_bounds_quad, dangling_index, count_mismatch, schema_violation, dimension_mismatch };

inline const std::vector<Kind>& all() {
  static const std::vector<Kind> kinds{Kind::out_of_bounds_quad, Kind::dangling_index, Kind::count_mismatch,
                                       Kind::schema_violation, Kind::dimension_mismatch};
  return kinds;
}

inline std::string name(Kind k) {
  switch (k) {
    case Kind::out_of_bounds_quad: return "out-of-bounds quad";
    case Kind::dangling_index: return "dangling index";
    case Kind::count_mismatch: return "count mismatch";
    case Kind::schema_violation: return "schema violation";
    case Kind::dimension_mismatch: return "image/record dimension mismatch";
  }
  return "?";
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary | std::ios::trunc) << text; }

/// Manifest lines, parsed.
inline std::vector<json> manifest(const fs::path& root) {
  std::vector<json> out;
  std::istringstream in(slurp(root / "manifest.jsonl"));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

/// First record line that has at least one char and one word.
inline json first_record(const fs::path& root) {
  for (const auto& m : manifest(root)) {
    if (m.value("type", "") != "record") continue;
    const json a = json::parse(slurp(root / m["annotation"].get<std::string>()));
    if (!a["chars"].empty() && !a["words"].empty()) return m;
  }
  throw std::runtime_error("corpus has no record with text");
}

/// Applies `k` to the corpus at `root` in place.
inline void apply(const fs::path& root, Kind k) {
  const json m = first_record(root);
  const fs::path annot = root / m["annotation"].get<std::string>();
  json a = json::parse(slurp(annot));
  switch (k) {
    case Kind::out_of_bounds_quad: {
      // Shift the first char far right; its word grows with it so only the bound breaks.
      const double dx = a["width"].get<double>() + 50;
      for (auto* q : {&a["chars"][0]["quad"], &a["chars"][0]["loose_quad"], &a["words"][0]["quad"]}) {
        for (int i = 0; i < 8; i += 2) (*q)[i] = (*q)[i].get<double>() + dx;
      }
      spit(annot, a.dump());
      break;
    }
    case Kind::dangling_index:
      a["words"][0]["char_indices"].push_back(static_cast<int>(a["chars"].size()) + 1000);
      spit(annot, a.dump());
      break;
    case Kind::count_mismatch: {
      std::string text;
      for (auto line : manifest(root)) {
        if (line["type"] == "summary") line["records"] = line["records"].get<std::uint64_t>() + 1;
        text += line.dump() + "\n";
      }
      spit(root / "manifest.jsonl", text);
      break;
    }
    case Kind::schema_violation:
      a["paragraphs"][0]["dom_depth"] = "deep";
      spit(annot, a.dump());
      break;
    case Kind::dimension_mismatch: {
      const fs::path img_path = root / a["image"].get<std::string>();
      auto img = vicorpus::image::read_file(img_path);
      vicorpus::image::Image smaller;
      smaller.width = img.width / 2;
      smaller.height = img.height;
      smaller.rgb.assign(static_cast<std::size_t>(smaller.width) * smaller.height * 3, 255);
      const auto fmt = img_path.extension() == ".png" ? vicorpus::image::Format::png : vicorpus::image::Format::jpeg;
      const auto bytes = vicorpus::image::encode(smaller, fmt, 90);
      spit(img_path, std::string(bytes.begin(), bytes.end()));
      break;
    }
  }
}

}  // namespace corrupt
