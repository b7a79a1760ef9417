#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vicorpus/geometry.hpp"
#include "vicorpus/report.hpp"

namespace vicorpus::fonts {
class FontCatalog;
}

namespace vicorpus::annotate {

struct CharAnn {
  std::string text;
  Quad quad;  // tight when `tight`, else the loose box
  Quad loose_quad;
  std::int64_t seq = 0;
  bool tight = false;
};

struct WordAnn {
  std::string text;
  Quad quad;
  std::vector<int> char_indices;
  bool is_latex = false;
};

struct LineAnn {
  std::vector<int> word_indices;
  Quad quad;
};

struct ParaAnn {
  std::vector<int> line_indices;
  Quad quad;
  int dom_depth = 0;
};

struct RegionAnn {
  Quad quad;
  report::RegionKind kind = report::RegionKind::image;
};

struct BuildStats {
  std::size_t loose_fallback = 0;   // chars left with their loose box
  std::size_t unknown_family = 0;   // subset of the above: family not in catalog
  std::size_t metric_mismatch = 0;  // subset: loose height disagrees with font metrics
  std::size_t latex_words = 0;
};

struct Annotations {
  std::vector<CharAnn> chars;
  std::vector<WordAnn> words;
  std::vector<LineAnn> lines;
  std::vector<ParaAnn> paragraphs;
  std::vector<RegionAnn> regions;
  BuildStats stats;
};

struct BuildOptions {
  /// A gap wider than gap_factor x the median loose width of the line splits a word.
  double gap_factor = 1.0;
  /// Minimum vertical overlap, relative to the shorter box, to join a line.
  double line_overlap = 0.5;
  /// Fraction of a word's area that must lie inside a LaTeX region to merge.
  double latex_overlap = 0.8;
  /// Loose boxes whose height differs from the font's ascender-descender
  /// span at the reported size by more than this many px are not tightened.
  double metric_tolerance_px = 1.0;
};

/// Full pipeline. The report must already be normalized (see report::normalize).
Annotations build(const report::InstrumentationReport& report, const fonts::FontCatalog* catalog,
                  const BuildOptions& options = {});

// Stages, exposed for tests.

/// A unit is something that occupies one slot in reading order and can belong
/// to a word: a visible character, or a LaTeX image with no text inside.
struct Unit {
  Rect loose;
  Rect tight;
  bool is_tight = false;
  std::string text;
  std::int64_t seq = 0;
  std::string para_key;
  int para_depth = 0;
  int latex_region = -1;  // index into report.regions for LaTeX pseudo-chars
};

std::vector<Unit> make_units(const report::InstrumentationReport& report, const fonts::FontCatalog* catalog,
                             const BuildOptions& options, BuildStats& stats);

/// Line id per unit; ids count up from 0 in order of first appearance.
std::vector<int> group_lines(const std::vector<Unit>& units, double min_overlap);

/// Word id per unit. `whitespace_seqs` must be sorted.
std::vector<int> group_words(const std::vector<Unit>& units, const std::vector<int>& line_ids,
                             const std::vector<std::int64_t>& whitespace_seqs, double gap_factor);

/// Median of the loose widths of the units on each line, indexed by line id.
std::vector<double> line_median_widths(const std::vector<Unit>& units, const std::vector<int>& line_ids);

/// Rounds to 3 decimals; monotone, so containment survives rounding.
double round_coord(double v);
Quad rounded_quad(const Rect& r);

}  // namespace vicorpus::annotate
