#pragma once

// Random InstrumentationReports for browser-free tests. Coordinates are
// multiples of 1/4 px so rect arithmetic is exact in double precision.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "vicorpus/report.hpp"

namespace test {

struct SyntheticOptions {
  int max_chars = 40;
  /// Probability that a paragraph carries a LaTeX region.
  double latex_chance = 0.2;
  /// Probability of an explicit whitespace record between two chars.
  double space_chance = 0.15;
  /// Probability of a wide gap (no whitespace record) before a char.
  double gap_chance = 0.1;
  std::string family = "Unknown Family";
};

inline double quarter(Rng& rng, double lo, double hi) { return std::round(rng.uniform(lo, hi) * 4.0) / 4.0; }

inline vicorpus::report::InstrumentationReport random_report(Rng& rng, const SyntheticOptions& o = {}) {
  using namespace vicorpus::report;
  InstrumentationReport r;
  r.script_version = "synthetic";
  r.page_width = 1280;
  r.page_height = 800;

  const int budget = rng.integer(0, o.max_chars);
  int made = 0;
  std::int64_t seq = 0;
  double y = 8;
  const int n_paras = rng.integer(1, 4);
  for (int p = 0; p < n_paras && made < budget; ++p) {
    const NodePath para{0, 1, p};
    const double size = quarter(rng, 10, 28);
    const int n_lines = rng.integer(1, 3);
    bool latex_pending = rng.chance(o.latex_chance);
    for (int l = 0; l < n_lines && made < budget; ++l) {
      double x = quarter(rng, 4, 40);
      const int per_line = rng.integer(1, 14);
      for (int c = 0; c < per_line && made < budget; ++c) {
        if (c > 0 && rng.chance(o.space_chance)) {
          CharRecord ws;
          ws.text = " ";
          ws.is_whitespace = true;
          ws.rect = {x, y, quarter(rng, 2, 6), size};
          ws.node_path = {0, 1, p, 0};
          ws.para_path = para;
          ws.dom_depth = 3;
          ws.seq = seq++;
          ws.font_family = o.family;
          ws.font_size_px = size;
          x += ws.rect.w;
          r.chars.push_back(ws);
        }
        if (c > 0 && rng.chance(o.gap_chance)) x += quarter(rng, 0, 3 * size);
        if (latex_pending && c > 0 && rng.chance(0.3)) {
          // Either a text-free formula image in the flow or one covering the next chars.
          RegionRecord g;
          g.kind = RegionKind::latex;
          g.node_path = {0, 1, p, 1 + c};
          g.para_path = para;
          g.seq = seq++;
          g.alt = "f(x)";
          g.rect = {x, y - quarter(rng, 0, 2), quarter(rng, 8, 40), size + quarter(rng, 0, 4)};
          x += g.rect.w + quarter(rng, 0, 3);
          r.regions.push_back(g);
          latex_pending = false;
        }
        CharRecord ch;
        ch.text = std::string(1, static_cast<char>('a' + rng.integer(0, 25)));
        ch.rect = {x, y + quarter(rng, -size / 4, size / 4), quarter(rng, size * 0.3, size * 0.8), size};
        ch.node_path = {0, 1, p, 0};
        ch.para_path = para;
        ch.dom_depth = 3;
        ch.seq = seq++;
        ch.font_family = o.family;
        ch.font_size_px = size;
        x += ch.rect.w;
        r.chars.push_back(ch);
        ++made;
        if (x > 1200) break;
      }
      y += size * 1.75;
    }
    y += size;
    if (rng.chance(0.15)) {
      RegionRecord g;
      g.kind = RegionKind::image;
      g.node_path = {0, 1, p, 9};
      g.para_path = para;
      g.seq = seq++;
      g.rect = {quarter(rng, 0, 600), y, quarter(rng, 10, 200), quarter(rng, 10, 60)};
      y += g.rect.h + 4;
      r.regions.push_back(g);
    }
  }
  return r;
}

}  // namespace test
