#include "vicorpus/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vicorpus/font_catalog.hpp"
#include "vicorpus/utf8.hpp"

namespace vicorpus::annotate {

using report::InstrumentationReport;
using report::RegionKind;

double round_coord(double v) { return std::round(v * 1000.0) / 1000.0; }

namespace {

bool has_prefix(const report::NodePath& path, const report::NodePath& prefix) {
  return path.size() > prefix.size() && std::equal(prefix.begin(), prefix.end(), path.begin());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

/// Edge-based box: unions of edges are exact, unlike x + w arithmetic.
struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  static Box of(const Rect& r) { return {r.left(), r.top(), r.right(), r.bottom()}; }
  Box operator|(const Box& o) const {
    return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
  }
  Rect rect() const { return Rect::from_edges(x0, y0, x1, y1); }
};

Quad rounded(const Box& b) {
  return Quad{{Point{round_coord(b.x0), round_coord(b.y0)}, Point{round_coord(b.x1), round_coord(b.y0)},
               Point{round_coord(b.x1), round_coord(b.y1)}, Point{round_coord(b.x0), round_coord(b.y1)}}};
}

struct WordDraft {
  std::vector<int> units;  // indices into the unit list
  std::vector<int> regions;  // LaTeX regions folded into this word
  int line = 0;
  bool is_latex = false;
  bool dead = false;
  Box rect;
  std::int64_t first_seq = 0;
};

}  // namespace

Quad rounded_quad(const Rect& r) { return rounded(Box::of(r)); }

std::vector<Unit> make_units(const InstrumentationReport& rep, const fonts::FontCatalog* catalog,
                             const BuildOptions& options, BuildStats& stats) {
  const Rect page{0, 0, static_cast<double>(rep.page_width), static_cast<double>(rep.page_height)};
  std::vector<Unit> units;
  units.reserve(rep.chars.size());
  for (const auto& c : rep.chars) {
    if (c.is_whitespace) continue;
    Unit u;
    u.loose = c.rect;
    u.tight = c.rect;
    u.text = c.text;
    u.seq = c.seq;
    u.para_key = report::path_key(c.para_path);
    u.para_depth = std::max(0, static_cast<int>(c.para_path.size()) - 1);

    const fonts::FontEntry* entry = catalog ? catalog->primary(c.font_family) : nullptr;
    if (entry == nullptr) {
      ++stats.unknown_family;
    } else {
      const double expected_h = c.font_size_px * (entry->ascender - entry->descender) / entry->units_per_em;
      if (std::abs(expected_h - c.rect.h) > options.metric_tolerance_px) {
        ++stats.metric_mismatch;
      } else {
        const auto r = catalog->glyph_ratio(*entry, utf8::first_scalar(c.text));
        if (r.status == fonts::RatioStatus::ok) {
          // Overhang may poke past the page edge; the image ends there.
          const auto t = fonts::tighten(c.rect, r.ratio);
          const Rect clipped = page.contains(t.rect) ? t.rect : intersection(t.rect, page);
          if (t.tight && !clipped.empty()) {
            u.tight = clipped;
            u.is_tight = true;
          }
        }
      }
    }
    if (!u.is_tight) ++stats.loose_fallback;
    units.push_back(std::move(u));
  }

  for (std::size_t i = 0; i < rep.regions.size(); ++i) {
    const auto& g = rep.regions[i];
    if (g.kind != RegionKind::latex) continue;
    const bool has_text = std::any_of(rep.chars.begin(), rep.chars.end(), [&](const report::CharRecord& c) {
      return !c.is_whitespace && has_prefix(c.node_path, g.node_path);
    });
    if (has_text) continue;
    Unit u;
    u.loose = g.rect;
    u.tight = g.rect;
    u.text = g.alt;
    u.seq = g.seq;
    u.para_key = report::path_key(g.para_path);
    u.para_depth = std::max(0, static_cast<int>(g.para_path.size()) - 1);
    u.latex_region = static_cast<int>(i);
    units.push_back(std::move(u));
  }
  std::stable_sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) { return a.seq < b.seq; });
  return units;
}

std::vector<int> group_lines(const std::vector<Unit>& units, double min_overlap) {
  std::vector<int> ids(units.size());
  int current = -1;
  Rect line_rect;
  const std::string* line_key = nullptr;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const Unit& u = units[i];
    bool join = false;
    if (current >= 0 && *line_key == u.para_key) {
      const double denom = std::min(u.loose.h, line_rect.h);
      join = denom > 0 && vertical_overlap(u.loose, line_rect) / denom >= min_overlap;
    }
    if (join) {
      line_rect = bounding_union(line_rect, u.loose);
    } else {
      ++current;
      line_rect = u.loose;
      line_key = &u.para_key;
    }
    ids[i] = current;
  }
  return ids;
}

std::vector<double> line_median_widths(const std::vector<Unit>& units, const std::vector<int>& line_ids) {
  const int n_lines = line_ids.empty() ? 0 : *std::max_element(line_ids.begin(), line_ids.end()) + 1;
  std::vector<std::vector<double>> widths(static_cast<std::size_t>(n_lines));
  for (std::size_t i = 0; i < units.size(); ++i) widths[static_cast<std::size_t>(line_ids[i])].push_back(units[i].loose.w);
  std::vector<double> out;
  out.reserve(widths.size());
  for (auto& w : widths) out.push_back(median(std::move(w)));
  return out;
}

std::vector<int> group_words(const std::vector<Unit>& units, const std::vector<int>& line_ids,
                             const std::vector<std::int64_t>& whitespace_seqs, double gap_factor) {
  std::vector<int> ids(units.size());
  const auto medians = line_median_widths(units, line_ids);
  int current = -1;
  for (std::size_t i = 0; i < units.size(); ++i) {
    bool split = i == 0;
    if (!split) {
      const Unit& a = units[i - 1];
      const Unit& b = units[i];
      const auto ws = std::upper_bound(whitespace_seqs.begin(), whitespace_seqs.end(), a.seq);
      split = line_ids[i] != line_ids[i - 1] || a.para_key != b.para_key || a.latex_region >= 0 ||
              b.latex_region >= 0 || (ws != whitespace_seqs.end() && *ws < b.seq) ||
              b.loose.left() - a.loose.right() > gap_factor * medians[static_cast<std::size_t>(line_ids[i])];
    }
    if (split) ++current;
    ids[i] = current;
  }
  return ids;
}

Annotations build(const InstrumentationReport& rep, const fonts::FontCatalog* catalog, const BuildOptions& options) {
  Annotations out;
  const std::vector<Unit> units = make_units(rep, catalog, options, out.stats);
  const std::vector<int> line_of = group_lines(units, options.line_overlap);

  std::vector<std::int64_t> ws;
  for (const auto& c : rep.chars) {
    if (c.is_whitespace) ws.push_back(c.seq);
  }
  std::sort(ws.begin(), ws.end());
  const std::vector<int> word_of = group_words(units, line_of, ws, options.gap_factor);

  // Chars in unit order (units are seq-sorted, so this is reading order).
  std::vector<int> char_of(units.size(), -1);
  for (std::size_t i = 0; i < units.size(); ++i) {
    const Unit& u = units[i];
    if (u.latex_region >= 0) continue;
    char_of[i] = static_cast<int>(out.chars.size());
    out.chars.push_back({u.text, rounded_quad(u.tight), rounded_quad(u.loose), u.seq, u.is_tight});
  }

  std::vector<WordDraft> words;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto w = static_cast<std::size_t>(word_of[i]);
    if (w >= words.size()) {
      words.emplace_back();
      words.back().line = line_of[i];
      words.back().first_seq = units[i].seq;
      words.back().rect = Box::of(units[i].loose);
    }
    WordDraft& d = words[w];
    d.units.push_back(static_cast<int>(i));
    d.rect = d.rect | Box::of(units[i].loose) | Box::of(units[i].tight);
    if (units[i].latex_region >= 0) {
      d.is_latex = true;
      d.regions.push_back(units[i].latex_region);
    }
  }

  // Fold words that sit inside a LaTeX region into one LaTeX word per line.
  for (std::size_t r = 0; r < rep.regions.size(); ++r) {
    const auto& region = rep.regions[r];
    if (region.kind != RegionKind::latex) continue;
    std::map<int, std::vector<std::size_t>> by_line;
    for (std::size_t w = 0; w < words.size(); ++w) {
      const WordDraft& d = words[w];
      if (d.dead) continue;
      const bool owns = std::find(d.regions.begin(), d.regions.end(), static_cast<int>(r)) != d.regions.end();
      const double area = d.rect.rect().area();
      if (owns || (area > 0 && intersection(d.rect.rect(), region.rect).area() >= options.latex_overlap * area)) {
        by_line[d.line].push_back(w);
      }
    }
    for (auto& [line, members] : by_line) {
      const bool already_single_latex = members.size() == 1 && words[members[0]].is_latex;
      if (already_single_latex) continue;
      WordDraft& target = words[members[0]];
      for (std::size_t k = 1; k < members.size(); ++k) {
        WordDraft& src = words[members[k]];
        target.units.insert(target.units.end(), src.units.begin(), src.units.end());
        target.regions.insert(target.regions.end(), src.regions.begin(), src.regions.end());
        target.rect = target.rect | src.rect;
        target.first_seq = std::min(target.first_seq, src.first_seq);
        src.dead = true;
      }
      target.is_latex = true;
      target.regions.push_back(static_cast<int>(r));
      target.rect = target.rect | Box::of(region.rect);
      std::sort(target.units.begin(), target.units.end());
    }
  }
  std::erase_if(words, [](const WordDraft& d) { return d.dead; });
  std::sort(words.begin(), words.end(), [](const WordDraft& a, const WordDraft& b) { return a.first_seq < b.first_seq; });

  const int n_lines = units.empty() ? 0 : line_of.back() + 1;
  std::vector<std::vector<int>> line_words(static_cast<std::size_t>(n_lines));
  std::vector<Box> line_rects(static_cast<std::size_t>(n_lines));
  std::vector<bool> line_seen(static_cast<std::size_t>(n_lines), false);
  for (std::size_t w = 0; w < words.size(); ++w) {
    const WordDraft& d = words[w];
    WordAnn ann;
    ann.is_latex = d.is_latex;
    std::string joined;
    for (int ui : d.units) {
      if (char_of[static_cast<std::size_t>(ui)] >= 0) {
        ann.char_indices.push_back(char_of[static_cast<std::size_t>(ui)]);
        joined += units[static_cast<std::size_t>(ui)].text;
      }
    }
    std::string alt;
    for (int r : d.regions) {
      if (!rep.regions[static_cast<std::size_t>(r)].alt.empty()) {
        alt = rep.regions[static_cast<std::size_t>(r)].alt;
        break;
      }
    }
    ann.text = d.is_latex && !alt.empty() ? alt : joined;
    ann.quad = rounded(d.rect);
    if (d.is_latex) ++out.stats.latex_words;
    out.words.push_back(std::move(ann));

    const auto l = static_cast<std::size_t>(d.line);
    line_words[l].push_back(static_cast<int>(w));
    line_rects[l] = line_seen[l] ? line_rects[l] | d.rect : d.rect;
    line_seen[l] = true;
  }

  // Lines and paragraphs in order of their first unit, which is their
  // first word because words are already sorted.
  std::vector<int> line_order;
  for (std::size_t l = 0; l < line_words.size(); ++l) {
    if (!line_words[l].empty()) line_order.push_back(static_cast<int>(l));
  }
  std::sort(line_order.begin(), line_order.end(),
            [&](int a, int b) { return line_words[static_cast<std::size_t>(a)].front() < line_words[static_cast<std::size_t>(b)].front(); });

  std::vector<std::string> line_key(static_cast<std::size_t>(n_lines));
  std::vector<int> line_depth(static_cast<std::size_t>(n_lines));
  for (std::size_t i = 0; i < units.size(); ++i) {
    line_key[static_cast<std::size_t>(line_of[i])] = units[i].para_key;
    line_depth[static_cast<std::size_t>(line_of[i])] = units[i].para_depth;
  }

  std::map<std::string, std::size_t> para_index;
  std::vector<Box> para_rects;
  for (int l : line_order) {
    const auto lu = static_cast<std::size_t>(l);
    LineAnn line;
    line.word_indices = line_words[lu];
    line.quad = rounded(line_rects[lu]);
    const int line_idx = static_cast<int>(out.lines.size());
    out.lines.push_back(std::move(line));

    auto [it, inserted] = para_index.try_emplace(line_key[lu], out.paragraphs.size());
    if (inserted) {
      ParaAnn p;
      p.dom_depth = line_depth[lu];
      out.paragraphs.push_back(std::move(p));
      para_rects.push_back(line_rects[lu]);
    } else {
      para_rects[it->second] = para_rects[it->second] | line_rects[lu];
    }
    out.paragraphs[it->second].line_indices.push_back(line_idx);
  }
  for (std::size_t p = 0; p < out.paragraphs.size(); ++p) out.paragraphs[p].quad = rounded(para_rects[p]);

  for (const auto& g : rep.regions) out.regions.push_back({rounded_quad(g.rect), g.kind});
  return out;
}

}  // namespace vicorpus::annotate
