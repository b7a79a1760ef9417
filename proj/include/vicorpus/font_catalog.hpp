#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "vicorpus/geometry.hpp"
#include "vicorpus/seed.hpp"
#include "vicorpus/sfnt.hpp"

namespace vicorpus::fonts {

struct FontEntry {
  std::string family;
  std::string style;
  /// Path relative to the catalog root, generic ('/') separators.
  std::string path;
  unsigned face_index = 0;
  int units_per_em = 0;
  int ascender = 0;
  int descender = 0;
  std::vector<CodepointRange> coverage;
  std::string sha256;

  bool covers(char32_t cp) const;
};

/// Glyph ink extent relative to the loose box of a single-glyph span.
/// Horizontal values are fractions of the advance width, vertical values
/// fractions of (ascender - descender) measured down from the ascender.
struct GlyphBoxRatio {
  double rx0 = 0;
  double rx1 = 1;
  double ry0 = 0;
  double ry1 = 1;
  friend bool operator==(const GlyphBoxRatio&, const GlyphBoxRatio&) = default;
};

enum class RatioStatus { ok, not_covered, zero_advance, empty_outline };

struct RatioResult {
  RatioStatus status = RatioStatus::not_covered;
  GlyphBoxRatio ratio;
};

GlyphBoxRatio ratio_from_bounds(const GlyphBounds& b, double advance, double ascender, double descender);

struct Tightened {
  Rect rect;
  bool tight = false;
};

/// Maps a loose rect through `ratio`. Degenerate results keep the loose
/// rect with tight = false.
Tightened tighten(const Rect& loose, const GlyphBoxRatio& ratio);

struct IndexOptions {
  /// Empty disables the cache file.
  std::filesystem::path cache_dir;
};

/// `${XDG_CACHE_HOME:-$HOME/.cache}/vicorpus`
std::filesystem::path default_cache_dir();

class FontCatalog {
 public:
  FontCatalog() = default;
  FontCatalog(const FontCatalog&) = delete;
  FontCatalog& operator=(const FontCatalog&) = delete;
  FontCatalog(FontCatalog&&) noexcept;
  FontCatalog& operator=(FontCatalog&&) noexcept;
  ~FontCatalog();

  /// Scans `dir` recursively for .ttf/.otf/.ttc/.otc files. Throws
  /// InputError when nothing parseable is found.
  static FontCatalog index(const std::filesystem::path& dir, const IndexOptions& options = {});

  /// Rebuilds a catalog from its JSON form; `root` locates the font files.
  static FontCatalog from_json(const nlohmann::json& j, const std::filesystem::path& root);
  nlohmann::json to_json() const;

  const std::filesystem::path& root() const { return root_; }
  const std::vector<FontEntry>& entries() const { return entries_; }
  /// Sorted distinct family names.
  std::vector<std::string> families() const;
  /// The face that represents `family` when the browser renders it
  /// (the Regular/Normal style when present, else the first style).
  const FontEntry* primary(std::string_view family) const;
  /// Whether the cache file was used by index().
  bool from_cache() const { return from_cache_; }
  const std::string& content_hash() const { return content_hash_; }

  /// Cached and thread-safe.
  RatioResult glyph_ratio(const FontEntry& entry, char32_t cp) const;

  /// Uniform choice among `candidates` whose primary face covers every
  /// non-space codepoint of `text`; `fallback` when none does or `text`
  /// has no such codepoints.
  std::string pick_family(std::string_view text, const std::vector<std::string>& candidates, SplitMix64& rng,
                          const std::string& fallback) const;

  std::filesystem::path absolute_path(const FontEntry& entry) const { return root_ / entry.path; }

 private:
  struct Cache;

  std::filesystem::path root_;
  std::vector<FontEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> primary_;
  std::string content_hash_;
  bool from_cache_ = false;
  std::unique_ptr<Cache> cache_;

  void finish();
};

}  // namespace vicorpus::fonts
