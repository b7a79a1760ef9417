#pragma once

// Minimal sfnt reader: enough of head/hhea/maxp/hmtx/cmap/name/glyf/loca/CFF
// to answer "which glyph, how wide, where is the ink".

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vicorpus/error.hpp"

namespace vicorpus::fonts {

class FontParseError : public Error {
 public:
  using Error::Error;
};

/// Ink extent of a glyph in font units (y up).
struct GlyphBounds {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;
};

struct CodepointRange {
  char32_t first = 0;
  char32_t last = 0;
  friend bool operator==(const CodepointRange&, const CodepointRange&) = default;
};

using FontBytes = std::shared_ptr<const std::vector<std::uint8_t>>;

/// One face of a TrueType/OpenType file (or TTC member).
class FontFace {
 public:
  /// Throws FontParseError when the data is not a usable sfnt face.
  static FontFace parse(FontBytes bytes, unsigned face_index = 0);

  /// 1 for plain sfnt, N for a collection; throws when not an sfnt at all.
  static unsigned face_count(std::span<const std::uint8_t> bytes);

  const std::string& family() const { return family_; }
  const std::string& style() const { return style_; }
  int units_per_em() const { return units_per_em_; }
  int ascender() const { return ascender_; }
  int descender() const { return descender_; }
  int line_gap() const { return line_gap_; }
  unsigned num_glyphs() const { return num_glyphs_; }
  bool is_cff() const { return cff_ != nullptr; }

  std::optional<std::uint16_t> glyph_for(char32_t cp) const;
  std::uint16_t advance_width(std::uint16_t gid) const;
  /// nullopt for glyphs without ink (space, empty composite).
  std::optional<GlyphBounds> glyph_bounds(std::uint16_t gid) const;
  /// Sorted, merged ranges of codepoints that map to a non-zero glyph.
  std::vector<CodepointRange> coverage() const;

  struct CffData;

 private:
  struct Contour;
  void outline(std::uint16_t gid, int depth, std::vector<Contour>& out) const;

  FontBytes bytes_;
  std::string family_;
  std::string style_;
  int units_per_em_ = 0;
  int ascender_ = 0;
  int descender_ = 0;
  int line_gap_ = 0;
  unsigned num_glyphs_ = 0;
  unsigned num_hmetrics_ = 0;
  int index_to_loc_format_ = 0;
  std::size_t hmtx_ = 0;
  std::size_t hmtx_len_ = 0;
  std::size_t glyf_ = 0;
  std::size_t glyf_len_ = 0;
  std::size_t loca_ = 0;
  std::size_t loca_len_ = 0;
  std::vector<std::pair<char32_t, std::uint16_t>> cmap_;
  std::shared_ptr<const CffData> cff_;
};

}  // namespace vicorpus::fonts
