#include "vicorpus/font_catalog.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include "vicorpus/error.hpp"
#include "vicorpus/hash.hpp"
#include "vicorpus/utf8.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vicorpus::fonts {

namespace {

constexpr int kCacheVersion = 1;

bool is_font_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ttf" || ext == ".otf" || ext == ".ttc" || ext == ".otc";
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

int style_rank(const std::string& style) {
  const std::string s = lower(style);
  if (s == "regular" || s == "normal" || s == "book" || s == "roman") return 0;
  if (s.find("italic") == std::string::npos && s.find("oblique") == std::string::npos &&
      s.find("bold") == std::string::npos) {
    return 1;
  }
  return 2;
}

json entry_to_json(const FontEntry& e) {
  json cov = json::array();
  for (const auto& r : e.coverage) cov.push_back({static_cast<std::uint32_t>(r.first), static_cast<std::uint32_t>(r.last)});
  return {{"family", e.family},           {"style", e.style},         {"path", e.path},
          {"face_index", e.face_index},   {"units_per_em", e.units_per_em},
          {"ascender", e.ascender},       {"descender", e.descender}, {"coverage", cov},
          {"sha256", e.sha256}};
}

FontEntry entry_from_json(const json& j) {
  FontEntry e;
  e.family = j.at("family").get<std::string>();
  e.style = j.at("style").get<std::string>();
  e.path = j.at("path").get<std::string>();
  e.face_index = j.at("face_index").get<unsigned>();
  e.units_per_em = j.at("units_per_em").get<int>();
  e.ascender = j.at("ascender").get<int>();
  e.descender = j.at("descender").get<int>();
  e.sha256 = j.at("sha256").get<std::string>();
  for (const auto& r : j.at("coverage")) {
    e.coverage.push_back({static_cast<char32_t>(r.at(0).get<std::uint32_t>()),
                          static_cast<char32_t>(r.at(1).get<std::uint32_t>())});
  }
  return e;
}

}  // namespace

bool FontEntry::covers(char32_t cp) const {
  auto it = std::upper_bound(coverage.begin(), coverage.end(), cp,
                             [](char32_t v, const CodepointRange& r) { return v < r.first; });
  if (it == coverage.begin()) return false;
  --it;
  return cp >= it->first && cp <= it->last;
}

GlyphBoxRatio ratio_from_bounds(const GlyphBounds& b, double advance, double ascender, double descender) {
  const double extent = ascender - descender;
  return {b.x_min / advance, b.x_max / advance, (ascender - b.y_max) / extent, (ascender - b.y_min) / extent};
}

Tightened tighten(const Rect& loose, const GlyphBoxRatio& r) {
  // Width/height come from the ratio span directly so that (0,1,0,1) is the
  // identity in floating point, not just in exact arithmetic.
  const double w = (r.rx1 - r.rx0) * loose.w;
  const double h = (r.ry1 - r.ry0) * loose.h;
  if (!(w > 0) || !(h > 0) || !std::isfinite(w) || !std::isfinite(h)) return {loose, false};
  return {Rect{loose.x + r.rx0 * loose.w, loose.y + r.ry0 * loose.h, w, h}, true};
}

fs::path default_cache_dir() {
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg != nullptr && *xdg != '\0') return fs::path(xdg) / "vicorpus";
  if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0') {
    return fs::path(home) / ".cache" / "vicorpus";
  }
  return fs::temp_directory_path() / "vicorpus-cache";
}

struct FontCatalog::Cache {
  std::shared_mutex mutex;
  std::unordered_map<std::string, std::shared_ptr<const FontFace>> faces;  // key: path#face
  std::unordered_map<std::uint64_t, RatioResult> ratios;  // key: entry index << 32 | cp
};

FontCatalog::FontCatalog(FontCatalog&&) noexcept = default;
FontCatalog& FontCatalog::operator=(FontCatalog&&) noexcept = default;
FontCatalog::~FontCatalog() = default;

void FontCatalog::finish() {
  std::sort(entries_.begin(), entries_.end(), [](const FontEntry& a, const FontEntry& b) {
    return std::tie(a.family, a.style, a.path, a.face_index) < std::tie(b.family, b.style, b.path, b.face_index);
  });
  primary_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto [it, inserted] = primary_.try_emplace(entries_[i].family, i);
    if (!inserted && style_rank(entries_[i].style) < style_rank(entries_[it->second].style)) it->second = i;
  }
  cache_ = std::make_unique<Cache>();
}

FontCatalog FontCatalog::index(const fs::path& dir, const IndexOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw InputError("font directory not found: " + dir.string());

  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(dir, fs::directory_options::skip_permission_denied, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (it->is_regular_file(ec) && is_font_file(it->path())) files.push_back(it->path());
  }
  if (ec) throw InputError("cannot scan font directory " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  // Content key: relative path + file hash of every candidate, in order.
  std::vector<std::pair<std::string, std::string>> hashed;
  std::string key_material;
  for (const auto& f : files) {
    std::string rel = f.lexically_relative(dir).generic_string();
    std::string h;
    try {
      h = sha256_file(f);
    } catch (const InputError& e) {
      spdlog::warn("skipping font {}: {}", rel, e.what());
      continue;
    }
    key_material += rel + '\0' + h + '\n';
    hashed.emplace_back(std::move(rel), std::move(h));
  }
  const std::string content_hash = sha256_hex(key_material);

  FontCatalog cat;
  cat.root_ = fs::absolute(dir);
  cat.content_hash_ = content_hash;

  fs::path cache_file;
  if (!options.cache_dir.empty()) {
    cache_file = options.cache_dir / ("catalog-" + content_hash.substr(0, 32) + ".json");
    std::ifstream in(cache_file);
    if (in) {
      try {
        const json j = json::parse(in);
        if (j.at("version").get<int>() == kCacheVersion && j.at("content_hash").get<std::string>() == content_hash) {
          FontCatalog cached = from_json(j, cat.root_);
          cached.from_cache_ = true;
          return cached;
        }
      } catch (const std::exception& e) {
        spdlog::warn("ignoring unreadable font cache {}: {}", cache_file.string(), e.what());
      }
    }
  }

  for (const auto& [rel, h] : hashed) {
    FontBytes bytes;
    try {
      bytes = std::make_shared<const std::vector<std::uint8_t>>(read_bytes(dir / rel));
      const unsigned faces = FontFace::face_count(*bytes);
      for (unsigned i = 0; i < faces; ++i) {
        try {
          const FontFace face = FontFace::parse(bytes, i);
          FontEntry e;
          e.family = face.family();
          e.style = face.style();
          e.path = rel;
          e.face_index = i;
          e.units_per_em = face.units_per_em();
          e.ascender = face.ascender();
          e.descender = face.descender();
          e.coverage = face.coverage();
          e.sha256 = h;
          if (e.ascender <= 0 || e.descender > 0 || e.coverage.empty()) {
            spdlog::warn("skipping font {}#{}: unusable metrics or empty cmap", rel, i);
            continue;
          }
          cat.entries_.push_back(std::move(e));
        } catch (const FontParseError& err) {
          spdlog::warn("skipping font {}#{}: {}", rel, i, err.what());
        }
      }
    } catch (const Error& err) {
      spdlog::warn("skipping font {}: {}", rel, err.what());
    }
  }
  if (cat.entries_.empty()) throw InputError("no parseable fonts under " + dir.string());
  cat.finish();

  if (!cache_file.empty()) {
    fs::create_directories(options.cache_dir, ec);
    const fs::path tmp = cache_file.string() + ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out) {
      out << cat.to_json().dump() << '\n';
      out.close();
      fs::rename(tmp, cache_file, ec);
    }
    if (!out || ec) spdlog::warn("could not write font cache {}", cache_file.string());
  }
  return cat;
}

FontCatalog FontCatalog::from_json(const json& j, const fs::path& root) {
  FontCatalog cat;
  cat.root_ = root;
  cat.content_hash_ = j.at("content_hash").get<std::string>();
  for (const auto& e : j.at("entries")) cat.entries_.push_back(entry_from_json(e));
  if (cat.entries_.empty()) throw InputError("font catalog has no entries");
  cat.finish();
  return cat;
}

json FontCatalog::to_json() const {
  json entries = json::array();
  for (const auto& e : entries_) entries.push_back(entry_to_json(e));
  return {{"version", kCacheVersion}, {"content_hash", content_hash_}, {"entries", std::move(entries)}};
}

std::vector<std::string> FontCatalog::families() const {
  std::vector<std::string> out;
  out.reserve(primary_.size());
  for (const auto& [family, idx] : primary_) out.push_back(family);
  return out;
}

const FontEntry* FontCatalog::primary(std::string_view family) const {
  auto it = primary_.find(family);
  return it == primary_.end() ? nullptr : &entries_[it->second];
}

RatioResult FontCatalog::glyph_ratio(const FontEntry& entry, char32_t cp) const {
  const auto idx = static_cast<std::uint64_t>(&entry - entries_.data());
  if (idx >= entries_.size()) throw Error("glyph_ratio: entry does not belong to this catalog");
  const std::uint64_t key = (idx << 32) | cp;
  {
    std::shared_lock lock(cache_->mutex);
    if (auto it = cache_->ratios.find(key); it != cache_->ratios.end()) return it->second;
  }

  const std::string face_key = entry.path + '#' + std::to_string(entry.face_index);
  std::shared_ptr<const FontFace> face;
  {
    std::shared_lock lock(cache_->mutex);
    if (auto it = cache_->faces.find(face_key); it != cache_->faces.end()) face = it->second;
  }
  if (!face) {
    auto bytes = std::make_shared<const std::vector<std::uint8_t>>(read_bytes(absolute_path(entry)));
    face = std::make_shared<const FontFace>(FontFace::parse(bytes, entry.face_index));
    std::unique_lock lock(cache_->mutex);
    face = cache_->faces.try_emplace(face_key, face).first->second;
  }

  RatioResult result;
  if (const auto gid = face->glyph_for(cp)) {
    const double advance = face->advance_width(*gid);
    const auto bounds = face->glyph_bounds(*gid);
    if (advance <= 0) {
      result.status = RatioStatus::zero_advance;
    } else if (!bounds) {
      result.status = RatioStatus::empty_outline;
    } else {
      result.status = RatioStatus::ok;
      result.ratio = ratio_from_bounds(*bounds, advance, entry.ascender, entry.descender);
    }
  }
  std::unique_lock lock(cache_->mutex);
  cache_->ratios.emplace(key, result);
  return result;
}

std::string FontCatalog::pick_family(std::string_view text, const std::vector<std::string>& candidates,
                                     SplitMix64& rng, const std::string& fallback) const {
  std::vector<char32_t> needed;
  for (char32_t cp : utf8::decode(text)) {
    if (!utf8::is_space_or_control(cp)) needed.push_back(cp);
  }
  if (needed.empty()) return fallback;
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  std::vector<const std::string*> eligible;
  for (const auto& family : candidates) {
    const FontEntry* e = primary(family);
    if (e == nullptr) continue;
    if (std::all_of(needed.begin(), needed.end(), [&](char32_t cp) { return e->covers(cp); })) {
      eligible.push_back(&family);
    }
  }
  if (eligible.empty()) return fallback;
  return *eligible[rng.below(eligible.size())];
}

}  // namespace vicorpus::fonts
