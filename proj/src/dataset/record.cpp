#include <algorithm>
#include <cctype>
#include <cstdio>

#include "vicorpus/dataset.hpp"
#include "vicorpus/error.hpp"
#include "vicorpus/hash.hpp"
#include "vicorpus/json_schema.hpp"
#include "vicorpus/resources.hpp"

using nlohmann::json;

namespace vicorpus::dataset {

namespace {

json quad_json(const Quad& q) { return q.flat(); }

Quad quad_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 8) throw Error("quad must have 8 numbers");
  return Quad::from_flat(std::span<const double, 8>(v.data(), 8));
}

std::string describe(const Quad& q) {
  const Rect r = q.bounds();
  char buf[160];
  std::snprintf(buf, sizeof buf, "[%g,%g .. %g,%g]", r.left(), r.top(), r.right(), r.bottom());
  return buf;
}

}  // namespace

json to_json(const DocumentRecord& r) {
  json chars = json::array();
  for (const auto& c : r.chars) {
    chars.push_back({{"text", c.text}, {"quad", quad_json(c.quad)}, {"loose_quad", quad_json(c.loose_quad)},
                     {"seq", c.seq}, {"tight", c.tight}});
  }
  json words = json::array();
  for (const auto& w : r.words) {
    words.push_back({{"text", w.text}, {"quad", quad_json(w.quad)}, {"char_indices", w.char_indices},
                     {"is_latex", w.is_latex}});
  }
  json lines = json::array();
  for (const auto& l : r.lines) lines.push_back({{"word_indices", l.word_indices}, {"quad", quad_json(l.quad)}});
  json paras = json::array();
  for (const auto& p : r.paragraphs) {
    paras.push_back({{"line_indices", p.line_indices}, {"quad", quad_json(p.quad)}, {"dom_depth", p.dom_depth}});
  }
  json regions = json::array();
  for (const auto& g : r.regions) regions.push_back({{"quad", quad_json(g.quad)}, {"kind", report::to_string(g.kind)}});
  return {{"doc_id", r.doc_id},
          {"lang", r.lang},
          {"image", r.image},
          {"width", r.width},
          {"height", r.height},
          {"seed", r.seed},
          {"generator_version", r.generator_version},
          {"truncated", r.truncated},
          {"font_assignment", r.font_assignment},
          {"chars", std::move(chars)},
          {"words", std::move(words)},
          {"lines", std::move(lines)},
          {"paragraphs", std::move(paras)},
          {"regions", std::move(regions)}};
}

DocumentRecord record_from_json(const json& j) {
  DocumentRecord r;
  r.doc_id = j.at("doc_id").get<std::string>();
  r.lang = j.at("lang").get<std::string>();
  r.image = j.at("image").get<std::string>();
  r.width = j.at("width").get<int>();
  r.height = j.at("height").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.generator_version = j.at("generator_version").get<std::string>();
  r.truncated = j.at("truncated").get<bool>();
  r.font_assignment = j.at("font_assignment").get<std::map<std::string, std::string>>();
  for (const auto& c : j.at("chars")) {
    r.chars.push_back({c.at("text").get<std::string>(), quad_from(c.at("quad")), quad_from(c.at("loose_quad")),
                       c.at("seq").get<std::int64_t>(), c.at("tight").get<bool>()});
  }
  for (const auto& w : j.at("words")) {
    r.words.push_back({w.at("text").get<std::string>(), quad_from(w.at("quad")),
                       w.at("char_indices").get<std::vector<int>>(), w.at("is_latex").get<bool>()});
  }
  for (const auto& l : j.at("lines")) r.lines.push_back({l.at("word_indices").get<std::vector<int>>(), quad_from(l.at("quad"))});
  for (const auto& p : j.at("paragraphs")) {
    r.paragraphs.push_back(
        {p.at("line_indices").get<std::vector<int>>(), quad_from(p.at("quad")), p.at("dom_depth").get<int>()});
  }
  for (const auto& g : j.at("regions")) {
    r.regions.push_back({quad_from(g.at("quad")), report::region_kind_from_string(g.at("kind").get<std::string>())});
  }
  return r;
}

std::string serialize(const DocumentRecord& r) { return to_json(r).dump() + "\n"; }

std::vector<std::string> record_schema_violations(const json& j) {
  static const JsonSchema schema(json::parse(resources::record_schema()));
  return schema.validate(j);
}

std::vector<std::string> record_invariant_violations(const DocumentRecord& r) {
  std::vector<std::string> out;
  const Rect page{0, 0, static_cast<double>(r.width), static_cast<double>(r.height)};

  auto check_quad = [&](const Quad& q, const std::string& name) {
    if (!q.axis_aligned()) {
      out.push_back(name + " is not an axis-aligned quad");
      return false;
    }
    if (!Quad::from_rect(page).contains(q)) {
      out.push_back(name + " " + describe(q) + " lies outside the " + std::to_string(r.width) + "x" +
                    std::to_string(r.height) + " image");
      return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < r.chars.size(); ++i) {
    check_quad(r.chars[i].quad, "chars[" + std::to_string(i) + "].quad");
    check_quad(r.chars[i].loose_quad, "chars[" + std::to_string(i) + "].loose_quad");
    if (i > 0 && r.chars[i].seq <= r.chars[i - 1].seq) out.push_back("chars[" + std::to_string(i) + "].seq not increasing");
  }
  for (std::size_t i = 0; i < r.words.size(); ++i) check_quad(r.words[i].quad, "words[" + std::to_string(i) + "].quad");
  for (std::size_t i = 0; i < r.lines.size(); ++i) check_quad(r.lines[i].quad, "lines[" + std::to_string(i) + "].quad");
  for (std::size_t i = 0; i < r.paragraphs.size(); ++i) {
    check_quad(r.paragraphs[i].quad, "paragraphs[" + std::to_string(i) + "].quad");
  }
  for (std::size_t i = 0; i < r.regions.size(); ++i) check_quad(r.regions[i].quad, "regions[" + std::to_string(i) + "].quad");

  // Each child level must be partitioned by its parents, with nested boxes.
  auto check_level = [&](const std::string& parent_name, std::size_t n_parents, auto&& children_of, auto&& parent_quad,
                         const std::string& child_name, std::size_t n_children, auto&& child_box) {
    std::vector<int> owners(n_children, 0);
    for (std::size_t p = 0; p < n_parents; ++p) {
      const std::vector<int>& kids = children_of(p);
      for (std::size_t k = 0; k < kids.size(); ++k) {
        const int c = kids[k];
        const std::string where = parent_name + "[" + std::to_string(p) + "]";
        if (c < 0 || static_cast<std::size_t>(c) >= n_children) {
          out.push_back(where + " references missing " + child_name + " " + std::to_string(c));
          continue;
        }
        ++owners[static_cast<std::size_t>(c)];
        if (!parent_quad(p).contains(child_box(static_cast<std::size_t>(c)))) {
          out.push_back(where + " does not contain " + child_name + "[" + std::to_string(c) + "]");
        }
      }
    }
    for (std::size_t c = 0; c < n_children; ++c) {
      if (owners[c] != 1) {
        out.push_back(child_name + "[" + std::to_string(c) + "] belongs to " + std::to_string(owners[c]) + " " +
                      parent_name + " entries, expected 1");
      }
    }
  };
  check_level(
      "words", r.words.size(), [&](std::size_t i) -> const std::vector<int>& { return r.words[i].char_indices; },
      [&](std::size_t i) { return r.words[i].quad; }, "chars", r.chars.size(),
      [&](std::size_t i) { return r.chars[i].loose_quad; });
  check_level(
      "lines", r.lines.size(), [&](std::size_t i) -> const std::vector<int>& { return r.lines[i].word_indices; },
      [&](std::size_t i) { return r.lines[i].quad; }, "words", r.words.size(),
      [&](std::size_t i) { return r.words[i].quad; });
  check_level(
      "paragraphs", r.paragraphs.size(),
      [&](std::size_t i) -> const std::vector<int>& { return r.paragraphs[i].line_indices; },
      [&](std::size_t i) { return r.paragraphs[i].quad; }, "lines", r.lines.size(),
      [&](std::size_t i) { return r.lines[i].quad; });
  return out;
}

std::string encode_doc_id(const std::string& doc_id) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : doc_id) {
    if (std::isalnum(c) || c == '.' || c == '_' || c == '-') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  // "." and ".." are not usable as file names.
  if (out == "." || out == "..") {
    std::string dots;
    for (std::size_t i = 0; i < out.size(); ++i) dots += "%2E";
    return dots;
  }
  // Keep names under common filesystem limits; the hash keeps them unique.
  if (out.size() > 200) out = out.substr(0, 160) + "~" + sha256_hex(doc_id).substr(0, 16);
  return out;
}

}  // namespace vicorpus::dataset
