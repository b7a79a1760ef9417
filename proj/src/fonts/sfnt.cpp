#include "vicorpus/sfnt.hpp"

#include "vicorpus/utf8.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>

namespace vicorpus::fonts {

namespace {

constexpr std::uint32_t tag(const char (&s)[5]) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(s[0])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[3]));
}

/// Bounds-checked big-endian view over the font bytes.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t size() const { return data_.size(); }

  void need(std::size_t off, std::size_t len) const {
    if (off > data_.size() || len > data_.size() - off) throw FontParseError("font data truncated");
  }
  std::uint8_t u8(std::size_t off) const {
    need(off, 1);
    return data_[off];
  }
  std::uint16_t u16(std::size_t off) const {
    need(off, 2);
    return static_cast<std::uint16_t>((data_[off] << 8) | data_[off + 1]);
  }
  std::int16_t s16(std::size_t off) const { return static_cast<std::int16_t>(u16(off)); }
  std::uint32_t u24(std::size_t off) const {
    need(off, 3);
    return (static_cast<std::uint32_t>(data_[off]) << 16) | (data_[off + 1] << 8) | data_[off + 2];
  }
  std::uint32_t u32(std::size_t off) const {
    need(off, 4);
    return (static_cast<std::uint32_t>(data_[off]) << 24) | (static_cast<std::uint32_t>(data_[off + 1]) << 16) |
           (static_cast<std::uint32_t>(data_[off + 2]) << 8) | data_[off + 3];
  }
  std::uint32_t offset_sized(std::size_t off, unsigned size) const {
    switch (size) {
      case 1:
        return u8(off);
      case 2:
        return u16(off);
      case 3:
        return u24(off);
      case 4:
        return u32(off);
      default:
        throw FontParseError("bad CFF offset size");
    }
  }
  std::span<const std::uint8_t> slice(std::size_t off, std::size_t len) const {
    need(off, len);
    return data_.subspan(off, len);
  }

 private:
  std::span<const std::uint8_t> data_;
};

struct TableRecord {
  std::size_t offset = 0;
  std::size_t length = 0;
};

std::optional<TableRecord> find_table(const Reader& r, std::size_t dir, std::uint32_t wanted) {
  const unsigned num_tables = r.u16(dir + 4);
  for (unsigned i = 0; i < num_tables; ++i) {
    const std::size_t rec = dir + 12 + 16 * static_cast<std::size_t>(i);
    if (r.u32(rec) == wanted) {
      TableRecord t{r.u32(rec + 8), r.u32(rec + 12)};
      r.need(t.offset, t.length);
      return t;
    }
  }
  return std::nullopt;
}

TableRecord require_table(const Reader& r, std::size_t dir, std::uint32_t wanted, const char* name) {
  auto t = find_table(r, dir, wanted);
  if (!t) throw FontParseError(std::string("missing required table ") + name);
  return *t;
}

/// Running min/max with curve-exact extrema.
class BoundsAccumulator {
 public:
  void add(double x, double y) {
    any_ = true;
    b_.x_min = std::min(b_.x_min, x);
    b_.y_min = std::min(b_.y_min, y);
    b_.x_max = std::max(b_.x_max, x);
    b_.y_max = std::max(b_.y_max, y);
  }

  void quad(double x0, double y0, double x1, double y1, double x2, double y2) {
    add(x2, y2);
    auto extreme = [](double a, double b, double c, auto&& emit) {
      const double den = a - 2 * b + c;
      if (den == 0) return;
      const double t = (a - b) / den;
      if (t > 0 && t < 1) emit(t);
    };
    auto point = [&](double t) {
      const double u = 1 - t;
      add(u * u * x0 + 2 * u * t * x1 + t * t * x2, u * u * y0 + 2 * u * t * y1 + t * t * y2);
    };
    extreme(x0, x1, x2, point);
    extreme(y0, y1, y2, point);
  }

  void cubic(double x0, double y0, double x1, double y1, double x2, double y2, double x3, double y3) {
    add(x3, y3);
    auto point = [&](double t) {
      const double u = 1 - t;
      const double a = u * u * u, b = 3 * u * u * t, c = 3 * u * t * t, d = t * t * t;
      add(a * x0 + b * x1 + c * x2 + d * x3, a * y0 + b * y1 + c * y2 + d * y3);
    };
    auto roots = [&](double p0, double p1, double p2, double p3) {
      const double a = -p0 + 3 * p1 - 3 * p2 + p3;
      const double b = 2 * (p0 - 2 * p1 + p2);
      const double c = p1 - p0;
      constexpr double eps = 1e-12;
      if (std::abs(a) < eps) {
        if (std::abs(b) > eps) {
          const double t = -c / b;
          if (t > 0 && t < 1) point(t);
        }
        return;
      }
      const double disc = b * b - 4 * a * c;
      if (disc < 0) return;
      const double sq = std::sqrt(disc);
      for (double t : {(-b + sq) / (2 * a), (-b - sq) / (2 * a)}) {
        if (t > 0 && t < 1) point(t);
      }
    };
    roots(x0, x1, x2, x3);
    roots(y0, y1, y2, y3);
  }

  std::optional<GlyphBounds> result() const {
    if (!any_) return std::nullopt;
    return b_;
  }

 private:
  bool any_ = false;
  GlyphBounds b_{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
};

std::string decode_utf16be(std::span<const std::uint8_t> s) {
  std::string out;
  for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
    char32_t cp = static_cast<char32_t>((s[i] << 8) | s[i + 1]);
    if (cp >= 0xD800 && cp <= 0xDBFF && i + 3 < s.size()) {
      const char32_t lo = static_cast<char32_t>((s[i + 2] << 8) | s[i + 3]);
      if (lo >= 0xDC00 && lo <= 0xDFFF) {
        cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
        i += 2;
      }
    }
    utf8::append(out, cp);
  }
  return out;
}

/// Best family/style from the name table: typographic names (16/17) win,
/// Windows Unicode English records are preferred over other platforms.
std::pair<std::string, std::string> read_names(const Reader& r, TableRecord name) {
  const std::size_t base = name.offset;
  const unsigned count = r.u16(base + 2);
  const std::size_t strings = base + r.u16(base + 4);
  struct Candidate {
    int score = -1;
    std::string value;
  };
  std::array<Candidate, 4> best;  // ids 1, 2, 16, 17
  for (unsigned i = 0; i < count; ++i) {
    const std::size_t rec = base + 6 + 12 * static_cast<std::size_t>(i);
    const unsigned platform = r.u16(rec);
    const unsigned encoding = r.u16(rec + 2);
    const unsigned language = r.u16(rec + 4);
    const unsigned id = r.u16(rec + 6);
    const unsigned len = r.u16(rec + 8);
    const unsigned off = r.u16(rec + 10);
    int slot = -1;
    if (id == 1) slot = 0;
    if (id == 2) slot = 1;
    if (id == 16) slot = 2;
    if (id == 17) slot = 3;
    if (slot < 0) continue;
    int score = -1;
    std::string value;
    if (platform == 3 && (encoding == 1 || encoding == 10)) {
      score = language == 0x409 ? 3 : 2;
      value = decode_utf16be(r.slice(strings + off, len));
    } else if (platform == 0) {
      score = 1;
      value = decode_utf16be(r.slice(strings + off, len));
    } else if (platform == 1 && encoding == 0) {
      score = 0;
      for (auto c : r.slice(strings + off, len)) {
        if (c < 0x80) value.push_back(static_cast<char>(c));
      }
    }
    if (score > best[slot].score && !value.empty()) best[slot] = {score, std::move(value)};
  }
  std::string family = !best[2].value.empty() ? best[2].value : best[0].value;
  std::string style = !best[3].value.empty() ? best[3].value : best[1].value;
  if (style.empty()) style = "Regular";
  return {family, style};
}

std::vector<std::pair<char32_t, std::uint16_t>> read_cmap(const Reader& r, TableRecord cmap, unsigned num_glyphs) {
  const std::size_t base = cmap.offset;
  const unsigned n = r.u16(base + 2);
  struct Choice {
    int rank = -1;
    std::size_t offset = 0;
  } choice;
  for (unsigned i = 0; i < n; ++i) {
    const std::size_t rec = base + 4 + 8 * static_cast<std::size_t>(i);
    const unsigned platform = r.u16(rec);
    const unsigned encoding = r.u16(rec + 2);
    const std::size_t off = base + r.u32(rec + 4);
    const unsigned format = r.u16(off);
    int rank = -1;
    const bool unicode_full = (platform == 3 && encoding == 10) || (platform == 0 && (encoding == 4 || encoding == 6));
    const bool unicode_bmp = (platform == 3 && encoding == 1) || (platform == 0 && encoding <= 3);
    if (format == 12 && unicode_full) rank = 5;
    else if (format == 12 && unicode_bmp) rank = 4;
    else if ((format == 4 || format == 6) && unicode_bmp) rank = 3;
    else if ((format == 4 || format == 6) && unicode_full) rank = 3;
    else if (format == 0 && unicode_bmp) rank = 2;
    else if (platform == 3 && encoding == 0 && (format == 4 || format == 6)) rank = 1;
    else if (platform == 1 && encoding == 0 && format == 0) rank = 0;
    if (rank > choice.rank) choice = {rank, off};
  }
  if (choice.rank < 0) throw FontParseError("no usable cmap subtable");

  std::vector<std::pair<char32_t, std::uint16_t>> map;
  auto put = [&](char32_t cp, std::uint32_t gid) {
    if (gid != 0 && gid < num_glyphs && cp <= 0x10FFFF) map.emplace_back(cp, static_cast<std::uint16_t>(gid));
  };
  const std::size_t off = choice.offset;
  const unsigned format = r.u16(off);
  if (format == 0) {
    for (unsigned cp = 0; cp < 256; ++cp) put(cp, r.u8(off + 6 + cp));
  } else if (format == 4) {
    const unsigned seg_x2 = r.u16(off + 6);
    const std::size_t ends = off + 14;
    const std::size_t starts = ends + seg_x2 + 2;
    const std::size_t deltas = starts + seg_x2;
    const std::size_t range_offsets = deltas + seg_x2;
    for (unsigned s = 0; s < seg_x2 / 2; ++s) {
      const unsigned end = r.u16(ends + 2 * s);
      const unsigned start = r.u16(starts + 2 * s);
      const unsigned delta = r.u16(deltas + 2 * s);
      const unsigned ro = r.u16(range_offsets + 2 * s);
      if (start > end) continue;
      for (unsigned cp = start; cp <= end && cp != 0xFFFF; ++cp) {
        unsigned gid = 0;
        if (ro == 0) {
          gid = (cp + delta) & 0xFFFF;
        } else {
          const std::size_t at = range_offsets + 2 * s + ro + 2 * static_cast<std::size_t>(cp - start);
          if (at + 2 > r.size()) break;
          gid = r.u16(at);
          if (gid != 0) gid = (gid + delta) & 0xFFFF;
        }
        put(cp, gid);
      }
    }
  } else if (format == 6) {
    const unsigned first = r.u16(off + 6);
    const unsigned count = r.u16(off + 8);
    for (unsigned i = 0; i < count; ++i) put(first + i, r.u16(off + 10 + 2 * i));
  } else if (format == 12) {
    const std::uint32_t groups = r.u32(off + 12);
    for (std::uint32_t g = 0; g < groups; ++g) {
      const std::size_t rec = off + 16 + 12 * static_cast<std::size_t>(g);
      const std::uint32_t start = r.u32(rec);
      const std::uint32_t end = std::min<std::uint32_t>(r.u32(rec + 4), 0x10FFFF);
      const std::uint32_t gid0 = r.u32(rec + 8);
      if (start > end) continue;
      for (std::uint32_t cp = start; cp <= end; ++cp) put(cp, gid0 + (cp - start));
    }
  } else {
    throw FontParseError("unsupported cmap format " + std::to_string(format));
  }
  std::sort(map.begin(), map.end());
  map.erase(std::unique(map.begin(), map.end(), [](auto& a, auto& b) { return a.first == b.first; }), map.end());
  return map;
}

// ---------------------------------------------------------------- CFF --

struct CffIndex {
  std::size_t data = 0;  // absolute offset of byte preceding the object data
  std::vector<std::uint32_t> offsets;
  std::size_t end = 0;  // absolute offset just past the INDEX

  std::size_t count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::pair<std::size_t, std::size_t> object(std::size_t i) const {
    return {data + offsets[i], offsets[i + 1] - offsets[i]};
  }
};

CffIndex read_index(const Reader& r, std::size_t at) {
  CffIndex idx;
  const unsigned count = r.u16(at);
  if (count == 0) {
    idx.end = at + 2;
    return idx;
  }
  const unsigned off_size = r.u8(at + 2);
  idx.offsets.resize(count + 1);
  for (unsigned i = 0; i <= count; ++i) idx.offsets[i] = r.offset_sized(at + 3 + i * off_size, off_size);
  for (unsigned i = 0; i < count; ++i) {
    if (idx.offsets[i + 1] < idx.offsets[i]) throw FontParseError("CFF INDEX offsets not monotone");
  }
  idx.data = at + 3 + (count + 1) * off_size - 1;
  idx.end = idx.data + idx.offsets[count];
  r.need(idx.data, idx.offsets[count] + 1);
  return idx;
}

/// Operator -> operand list; two-byte operators are keyed as 1200 + b1.
using CffDict = std::vector<std::pair<int, std::vector<double>>>;

CffDict read_dict(const Reader& r, std::size_t at, std::size_t len) {
  CffDict dict;
  std::vector<double> operands;
  std::size_t i = at;
  const std::size_t end = at + len;
  while (i < end) {
    const unsigned b0 = r.u8(i);
    if (b0 <= 21) {
      int op = static_cast<int>(b0);
      ++i;
      if (b0 == 12) op = 1200 + r.u8(i++);
      dict.emplace_back(op, operands);
      operands.clear();
    } else if (b0 == 28) {
      operands.push_back(r.s16(i + 1));
      i += 3;
    } else if (b0 == 29) {
      operands.push_back(static_cast<std::int32_t>(r.u32(i + 1)));
      i += 5;
    } else if (b0 == 30) {
      std::string text;
      ++i;
      bool done = false;
      while (!done && i < end) {
        const unsigned byte = r.u8(i++);
        for (unsigned nib : {byte >> 4, byte & 0xF}) {
          if (nib <= 9) text.push_back(static_cast<char>('0' + nib));
          else if (nib == 0xA) text.push_back('.');
          else if (nib == 0xB) text.push_back('E');
          else if (nib == 0xC) text += "E-";
          else if (nib == 0xE) text.push_back('-');
          else if (nib == 0xF) { done = true; break; }
        }
      }
      operands.push_back(text.empty() ? 0.0 : std::strtod(text.c_str(), nullptr));
    } else if (b0 >= 32 && b0 <= 246) {
      operands.push_back(static_cast<int>(b0) - 139);
      ++i;
    } else if (b0 >= 247 && b0 <= 250) {
      operands.push_back((static_cast<int>(b0) - 247) * 256 + r.u8(i + 1) + 108);
      i += 2;
    } else if (b0 >= 251 && b0 <= 254) {
      operands.push_back(-(static_cast<int>(b0) - 251) * 256 - r.u8(i + 1) - 108);
      i += 2;
    } else {
      throw FontParseError("bad CFF DICT byte");
    }
  }
  return dict;
}

const std::vector<double>* dict_get(const CffDict& d, int op) {
  for (const auto& [k, v] : d) {
    if (k == op) return &v;
  }
  return nullptr;
}

}  // namespace

struct FontFace::CffData {
  CffIndex charstrings;
  CffIndex global_subrs;
  std::vector<CffIndex> local_subrs;  // one per font DICT
  std::vector<std::uint8_t> fd_of_glyph;  // empty unless CID-keyed
};

namespace {

std::shared_ptr<const FontFace::CffData> read_cff(const Reader& r, TableRecord table, unsigned num_glyphs) {
  auto cff = std::make_shared<FontFace::CffData>();
  const std::size_t base = table.offset;
  const unsigned major = r.u8(base);
  if (major != 1) throw FontParseError("only CFF version 1 is supported");
  const unsigned header_size = r.u8(base + 2);
  const CffIndex names = read_index(r, base + header_size);
  const CffIndex top_dicts = read_index(r, names.end);
  const CffIndex strings = read_index(r, top_dicts.end);
  cff->global_subrs = read_index(r, strings.end);
  if (top_dicts.count() < 1) throw FontParseError("CFF without Top DICT");
  const auto [top_at, top_len] = top_dicts.object(0);
  const CffDict top = read_dict(r, top_at, top_len);

  if (const auto* type = dict_get(top, 1206); type && !type->empty() && (*type)[0] != 2) {
    throw FontParseError("only Type 2 charstrings are supported");
  }
  const auto* cs = dict_get(top, 17);
  if (cs == nullptr || cs->empty()) throw FontParseError("CFF without CharStrings");
  cff->charstrings = read_index(r, base + static_cast<std::size_t>((*cs)[0]));
  if (cff->charstrings.count() < num_glyphs) throw FontParseError("CFF CharStrings shorter than maxp");

  auto private_subrs = [&](const CffDict& font_dict) {
    const auto* priv = dict_get(font_dict, 18);
    if (priv == nullptr || priv->size() < 2) return CffIndex{};
    const std::size_t p_len = static_cast<std::size_t>((*priv)[0]);
    const std::size_t p_at = base + static_cast<std::size_t>((*priv)[1]);
    const CffDict pd = read_dict(r, p_at, p_len);
    const auto* subrs = dict_get(pd, 19);
    if (subrs == nullptr || subrs->empty()) return CffIndex{};
    return read_index(r, p_at + static_cast<std::size_t>((*subrs)[0]));
  };

  const auto* fd_array = dict_get(top, 1236);
  const auto* fd_select = dict_get(top, 1237);
  if (fd_array != nullptr && fd_select != nullptr && !fd_array->empty() && !fd_select->empty()) {
    const CffIndex fds = read_index(r, base + static_cast<std::size_t>((*fd_array)[0]));
    for (std::size_t i = 0; i < fds.count(); ++i) {
      const auto [at, len] = fds.object(i);
      cff->local_subrs.push_back(private_subrs(read_dict(r, at, len)));
    }
    const std::size_t sel = base + static_cast<std::size_t>((*fd_select)[0]);
    cff->fd_of_glyph.assign(num_glyphs, 0);
    const unsigned format = r.u8(sel);
    if (format == 0) {
      for (unsigned g = 0; g < num_glyphs; ++g) cff->fd_of_glyph[g] = r.u8(sel + 1 + g);
    } else if (format == 3) {
      const unsigned n_ranges = r.u16(sel + 1);
      for (unsigned k = 0; k < n_ranges; ++k) {
        const unsigned first = r.u16(sel + 3 + 3 * k);
        const unsigned fd = r.u8(sel + 5 + 3 * k);
        const unsigned next = r.u16(sel + 6 + 3 * k);
        for (unsigned g = first; g < next && g < num_glyphs; ++g) cff->fd_of_glyph[g] = static_cast<std::uint8_t>(fd);
      }
    } else {
      throw FontParseError("unsupported FDSelect format");
    }
  } else {
    cff->local_subrs.push_back(private_subrs(top));
  }
  return cff;
}

int subr_bias(std::size_t count) {
  if (count < 1240) return 107;
  if (count < 33900) return 1131;
  return 32768;
}

/// Type 2 charstring interpreter that only tracks the outline extent.
class CharstringBounds {
 public:
  CharstringBounds(const Reader& r, const FontFace::CffData& cff, const CffIndex& local)
      : r_(r), cff_(cff), local_(local) {}

  std::optional<GlyphBounds> run(std::uint16_t gid) {
    const auto [at, len] = cff_.charstrings.object(gid);
    exec(at, len, 0);
    return acc_.result();
  }

 private:
  void push(double v) {
    if (stack_.size() >= 513) throw FontParseError("charstring stack overflow");
    stack_.push_back(v);
  }

  void move_to(double dx, double dy) {
    x_ += dx;
    y_ += dy;
    open_ = false;
  }
  void start_contour() {
    if (!open_) {
      acc_.add(x_, y_);
      open_ = true;
    }
  }
  void line_to(double dx, double dy) {
    start_contour();
    x_ += dx;
    y_ += dy;
    acc_.add(x_, y_);
  }
  void curve_to(double dx1, double dy1, double dx2, double dy2, double dx3, double dy3) {
    start_contour();
    const double x0 = x_, y0 = y_;
    const double x1 = x0 + dx1, y1 = y0 + dy1;
    const double x2 = x1 + dx2, y2 = y1 + dy2;
    x_ = x2 + dx3;
    y_ = y2 + dy3;
    acc_.cubic(x0, y0, x1, y1, x2, y2, x_, y_);
  }

  void stems() {
    n_stems_ += stack_.size() / 2;
    stack_.clear();
  }

  void exec(std::size_t at, std::size_t len, int depth) {
    if (depth > 10) throw FontParseError("charstring subroutine nesting too deep");
    std::size_t i = at;
    const std::size_t end = at + len;
    while (i < end) {
      if (done_) return;
      const unsigned b0 = r_.u8(i++);
      if (b0 >= 32 || b0 == 28) {
        if (b0 == 28) {
          push(r_.s16(i));
          i += 2;
        } else if (b0 <= 246) {
          push(static_cast<int>(b0) - 139);
        } else if (b0 <= 250) {
          push((static_cast<int>(b0) - 247) * 256 + r_.u8(i++) + 108);
        } else if (b0 <= 254) {
          push(-(static_cast<int>(b0) - 251) * 256 - r_.u8(i++) - 108);
        } else {
          push(static_cast<std::int32_t>(r_.u32(i)) / 65536.0);
          i += 4;
        }
        continue;
      }
      auto& s = stack_;
      switch (b0) {
        case 1:   // hstem
        case 3:   // vstem
        case 18:  // hstemhm
        case 23:  // vstemhm
          stems();
          break;
        case 19:  // hintmask
        case 20:  // cntrmask
          stems();
          i += (n_stems_ + 7) / 8;
          break;
        case 21:  // rmoveto
          if (s.size() < 2) throw FontParseError("rmoveto underflow");
          move_to(s[s.size() - 2], s[s.size() - 1]);
          s.clear();
          break;
        case 22:  // hmoveto
          if (s.empty()) throw FontParseError("hmoveto underflow");
          move_to(s.back(), 0);
          s.clear();
          break;
        case 4:  // vmoveto
          if (s.empty()) throw FontParseError("vmoveto underflow");
          move_to(0, s.back());
          s.clear();
          break;
        case 5:  // rlineto
          for (std::size_t k = 0; k + 1 < s.size(); k += 2) line_to(s[k], s[k + 1]);
          s.clear();
          break;
        case 6:  // hlineto
        case 7:  // vlineto
        {
          bool horizontal = b0 == 6;
          for (double v : s) {
            if (horizontal) line_to(v, 0);
            else line_to(0, v);
            horizontal = !horizontal;
          }
          s.clear();
          break;
        }
        case 8:  // rrcurveto
          for (std::size_t k = 0; k + 5 < s.size(); k += 6) curve_to(s[k], s[k + 1], s[k + 2], s[k + 3], s[k + 4], s[k + 5]);
          s.clear();
          break;
        case 24: {  // rcurveline
          std::size_t k = 0;
          for (; k + 7 < s.size(); k += 6) curve_to(s[k], s[k + 1], s[k + 2], s[k + 3], s[k + 4], s[k + 5]);
          if (k + 1 < s.size()) line_to(s[k], s[k + 1]);
          s.clear();
          break;
        }
        case 25: {  // rlinecurve
          std::size_t k = 0;
          for (; k + 7 < s.size(); k += 2) line_to(s[k], s[k + 1]);
          if (k + 5 < s.size()) curve_to(s[k], s[k + 1], s[k + 2], s[k + 3], s[k + 4], s[k + 5]);
          s.clear();
          break;
        }
        case 26: {  // vvcurveto
          std::size_t k = 0;
          double dx1 = 0;
          if (s.size() % 4 == 1) dx1 = s[k++];
          for (; k + 3 < s.size(); k += 4) {
            curve_to(dx1, s[k], s[k + 1], s[k + 2], 0, s[k + 3]);
            dx1 = 0;
          }
          s.clear();
          break;
        }
        case 27: {  // hhcurveto
          std::size_t k = 0;
          double dy1 = 0;
          if (s.size() % 4 == 1) dy1 = s[k++];
          for (; k + 3 < s.size(); k += 4) {
            curve_to(s[k], dy1, s[k + 1], s[k + 2], s[k + 3], 0);
            dy1 = 0;
          }
          s.clear();
          break;
        }
        case 30:  // vhcurveto
        case 31:  // hvcurveto
        {
          bool horizontal = b0 == 31;
          std::size_t k = 0;
          while (k + 3 < s.size()) {
            const bool last = s.size() - k == 5;
            const double extra = last ? s[k + 4] : 0;
            if (horizontal) curve_to(s[k], 0, s[k + 1], s[k + 2], extra, s[k + 3]);
            else curve_to(0, s[k], s[k + 1], s[k + 2], s[k + 3], extra);
            k += last ? 5 : 4;
            horizontal = !horizontal;
          }
          s.clear();
          break;
        }
        case 10:  // callsubr
        case 29:  // callgsubr
        {
          if (s.empty()) throw FontParseError("callsubr underflow");
          const CffIndex& idx = b0 == 10 ? local_ : cff_.global_subrs;
          const long n = static_cast<long>(s.back()) + subr_bias(idx.count());
          s.pop_back();
          if (n < 0 || static_cast<std::size_t>(n) >= idx.count()) throw FontParseError("subroutine index out of range");
          const auto [sat, slen] = idx.object(static_cast<std::size_t>(n));
          exec(sat, slen, depth + 1);
          break;
        }
        case 11:  // return
          return;
        case 14:  // endchar
          s.clear();
          done_ = true;
          return;
        case 12: {
          const unsigned b1 = r_.u8(i++);
          exec_escape(b1);
          break;
        }
        default:
          throw FontParseError("unsupported charstring operator " + std::to_string(b0));
      }
    }
  }

  void exec_escape(unsigned op) {
    auto& s = stack_;
    auto need = [&](std::size_t n) {
      if (s.size() < n) throw FontParseError("charstring operator underflow");
    };
    switch (op) {
      case 35:  // flex
        need(13);
        curve_to(s[0], s[1], s[2], s[3], s[4], s[5]);
        curve_to(s[6], s[7], s[8], s[9], s[10], s[11]);
        s.clear();
        break;
      case 34: {  // hflex
        need(7);
        const double y0 = y_;
        curve_to(s[0], 0, s[1], s[2], s[3], 0);
        curve_to(s[4], 0, s[5], y0 - y_, s[6], 0);
        s.clear();
        break;
      }
      case 36: {  // hflex1
        need(9);
        const double y0 = y_;
        curve_to(s[0], s[1], s[2], s[3], s[4], 0);
        curve_to(s[5], 0, s[6], s[7], s[8], y0 - (y_ + s[7]));
        s.clear();
        break;
      }
      case 37: {  // flex1
        need(11);
        const double sx = x_, sy = y_;
        double dx = 0, dy = 0;
        for (int k = 0; k < 10; k += 2) {
          dx += s[k];
          dy += s[k + 1];
        }
        curve_to(s[0], s[1], s[2], s[3], s[4], s[5]);
        const double d6 = s[10];
        if (std::abs(dx) > std::abs(dy)) curve_to(s[6], s[7], s[8], s[9], d6, sy - (y_ + s[7] + s[9]));
        else curve_to(s[6], s[7], s[8], s[9], sx - (x_ + s[6] + s[8]), d6);
        s.clear();
        break;
      }
      case 9:  // abs
        need(1);
        s.back() = std::abs(s.back());
        break;
      case 10:  // add
        need(2);
        s[s.size() - 2] += s.back();
        s.pop_back();
        break;
      case 11:  // sub
        need(2);
        s[s.size() - 2] -= s.back();
        s.pop_back();
        break;
      case 12:  // div
        need(2);
        s[s.size() - 2] = s.back() == 0 ? 0 : s[s.size() - 2] / s.back();
        s.pop_back();
        break;
      case 14:  // neg
        need(1);
        s.back() = -s.back();
        break;
      case 18:  // drop
        need(1);
        s.pop_back();
        break;
      case 24:  // mul
        need(2);
        s[s.size() - 2] *= s.back();
        s.pop_back();
        break;
      case 27:  // dup
        need(1);
        push(s.back());
        break;
      case 28:  // exch
        need(2);
        std::swap(s[s.size() - 1], s[s.size() - 2]);
        break;
      case 0:  // dotsection (deprecated no-op)
        break;
      default:
        throw FontParseError("unsupported charstring escape operator " + std::to_string(op));
    }
  }

  const Reader& r_;
  const FontFace::CffData& cff_;
  const CffIndex& local_;
  std::vector<double> stack_;
  std::size_t n_stems_ = 0;
  double x_ = 0;
  double y_ = 0;
  bool open_ = false;
  bool done_ = false;
  BoundsAccumulator acc_;
};

}  // namespace

struct FontFace::Contour {
  struct Pt {
    double x;
    double y;
    bool on;
  };
  std::vector<Pt> pts;
};

unsigned FontFace::face_count(std::span<const std::uint8_t> bytes) {
  const Reader r(bytes);
  if (r.size() < 12) throw FontParseError("file too small for sfnt");
  const std::uint32_t version = r.u32(0);
  if (version == tag("ttcf")) return r.u32(8);
  if (version == 0x00010000 || version == tag("OTTO") || version == tag("true")) return 1;
  throw FontParseError("not an sfnt font");
}

FontFace FontFace::parse(FontBytes bytes, unsigned face_index) {
  if (!bytes) throw FontParseError("no font data");
  FontFace f;
  f.bytes_ = bytes;
  const Reader r(*bytes);
  const unsigned faces = face_count(*bytes);
  if (face_index >= faces) throw FontParseError("face index out of range");
  std::size_t dir = 0;
  if (r.u32(0) == tag("ttcf")) dir = r.u32(12 + 4 * face_index);

  const auto head = require_table(r, dir, tag("head"), "head");
  const auto hhea = require_table(r, dir, tag("hhea"), "hhea");
  const auto maxp = require_table(r, dir, tag("maxp"), "maxp");
  const auto hmtx = require_table(r, dir, tag("hmtx"), "hmtx");
  const auto cmap = require_table(r, dir, tag("cmap"), "cmap");

  f.units_per_em_ = r.u16(head.offset + 18);
  if (f.units_per_em_ <= 0) throw FontParseError("unitsPerEm must be positive");
  f.index_to_loc_format_ = r.s16(head.offset + 50);
  f.ascender_ = r.s16(hhea.offset + 4);
  f.descender_ = r.s16(hhea.offset + 6);
  f.line_gap_ = r.s16(hhea.offset + 8);
  f.num_hmetrics_ = r.u16(hhea.offset + 34);
  f.num_glyphs_ = r.u16(maxp.offset + 4);
  if (f.num_glyphs_ == 0 || f.num_hmetrics_ == 0) throw FontParseError("font has no glyphs");
  if (f.ascender_ == 0 && f.descender_ == 0) {
    // Some fonts leave hhea zeroed and rely on OS/2 typo metrics.
    if (auto os2 = find_table(r, dir, tag("OS/2")); os2 && os2->length >= 72) {
      f.ascender_ = r.s16(os2->offset + 68);
      f.descender_ = r.s16(os2->offset + 70);
    }
  }
  f.hmtx_ = hmtx.offset;
  f.hmtx_len_ = hmtx.length;
  if (f.hmtx_len_ < 4 * static_cast<std::size_t>(f.num_hmetrics_)) throw FontParseError("hmtx too short");

  if (auto name = find_table(r, dir, tag("name"))) {
    auto [family, style] = read_names(r, *name);
    f.family_ = std::move(family);
    f.style_ = std::move(style);
  }
  if (f.family_.empty()) throw FontParseError("font has no family name");

  f.cmap_ = read_cmap(r, cmap, f.num_glyphs_);

  if (auto glyf = find_table(r, dir, tag("glyf"))) {
    const auto loca = require_table(r, dir, tag("loca"), "loca");
    f.glyf_ = glyf->offset;
    f.glyf_len_ = glyf->length;
    f.loca_ = loca.offset;
    f.loca_len_ = loca.length;
    const std::size_t entry = f.index_to_loc_format_ == 0 ? 2 : 4;
    if (f.loca_len_ < entry * (f.num_glyphs_ + 1)) throw FontParseError("loca too short");
  } else if (auto cff = find_table(r, dir, tag("CFF "))) {
    f.cff_ = read_cff(r, *cff, f.num_glyphs_);
  } else {
    throw FontParseError("font has neither glyf nor CFF outlines");
  }
  return f;
}

std::optional<std::uint16_t> FontFace::glyph_for(char32_t cp) const {
  auto it = std::lower_bound(cmap_.begin(), cmap_.end(), cp,
                             [](const auto& entry, char32_t v) { return entry.first < v; });
  if (it == cmap_.end() || it->first != cp) return std::nullopt;
  return it->second;
}

std::uint16_t FontFace::advance_width(std::uint16_t gid) const {
  const Reader r(*bytes_);
  const unsigned idx = std::min<unsigned>(gid, num_hmetrics_ - 1);
  return r.u16(hmtx_ + 4 * static_cast<std::size_t>(idx));
}

std::vector<CodepointRange> FontFace::coverage() const {
  std::vector<CodepointRange> out;
  for (const auto& [cp, gid] : cmap_) {
    if (!out.empty() && out.back().last + 1 == cp) {
      out.back().last = cp;
    } else {
      out.push_back({cp, cp});
    }
  }
  return out;
}

void FontFace::outline(std::uint16_t gid, int depth, std::vector<Contour>& out) const {
  if (depth > 8) throw FontParseError("composite glyph nesting too deep");
  const Reader r(*bytes_);
  std::size_t start = 0, end = 0;
  if (index_to_loc_format_ == 0) {
    start = 2 * static_cast<std::size_t>(r.u16(loca_ + 2 * static_cast<std::size_t>(gid)));
    end = 2 * static_cast<std::size_t>(r.u16(loca_ + 2 * static_cast<std::size_t>(gid) + 2));
  } else {
    start = r.u32(loca_ + 4 * static_cast<std::size_t>(gid));
    end = r.u32(loca_ + 4 * static_cast<std::size_t>(gid) + 4);
  }
  if (end <= start) return;  // no outline
  if (end > glyf_len_) throw FontParseError("glyph data outside glyf table");
  const std::size_t g = glyf_ + start;
  const int n_contours = r.s16(g);

  if (n_contours >= 0) {
    std::vector<unsigned> end_pts(static_cast<std::size_t>(n_contours));
    for (int c = 0; c < n_contours; ++c) end_pts[c] = r.u16(g + 10 + 2 * static_cast<std::size_t>(c));
    if (n_contours == 0) return;
    const unsigned n_points = end_pts.back() + 1;
    const std::size_t instr_len_at = g + 10 + 2 * static_cast<std::size_t>(n_contours);
    std::size_t p = instr_len_at + 2 + r.u16(instr_len_at);
    std::vector<std::uint8_t> flags;
    flags.reserve(n_points);
    while (flags.size() < n_points) {
      const std::uint8_t fl = r.u8(p++);
      flags.push_back(fl);
      if (fl & 0x08) {
        const unsigned repeat = r.u8(p++);
        for (unsigned k = 0; k < repeat && flags.size() < n_points; ++k) flags.push_back(fl);
      }
    }
    std::vector<double> xs(n_points), ys(n_points);
    int v = 0;
    for (unsigned k = 0; k < n_points; ++k) {
      const auto fl = flags[k];
      if (fl & 0x02) {
        const int d = r.u8(p++);
        v += (fl & 0x10) ? d : -d;
      } else if (!(fl & 0x10)) {
        v += r.s16(p);
        p += 2;
      }
      xs[k] = v;
    }
    v = 0;
    for (unsigned k = 0; k < n_points; ++k) {
      const auto fl = flags[k];
      if (fl & 0x04) {
        const int d = r.u8(p++);
        v += (fl & 0x20) ? d : -d;
      } else if (!(fl & 0x20)) {
        v += r.s16(p);
        p += 2;
      }
      ys[k] = v;
    }
    unsigned first = 0;
    for (unsigned c = 0; c < end_pts.size(); ++c) {
      if (end_pts[c] < first || end_pts[c] >= n_points) throw FontParseError("bad contour end points");
      Contour contour;
      for (unsigned k = first; k <= end_pts[c]; ++k) contour.pts.push_back({xs[k], ys[k], (flags[k] & 0x01) != 0});
      out.push_back(std::move(contour));
      first = end_pts[c] + 1;
    }
    return;
  }

  // Composite glyph.
  std::size_t p = g + 10;
  for (;;) {
    const unsigned flags = r.u16(p);
    const std::uint16_t child = r.u16(p + 2);
    p += 4;
    double arg1 = 0, arg2 = 0;
    int uarg1 = 0, uarg2 = 0;
    if (flags & 0x0001) {
      if (flags & 0x0002) {
        arg1 = r.s16(p);
        arg2 = r.s16(p + 2);
      } else {
        uarg1 = r.u16(p);
        uarg2 = r.u16(p + 2);
      }
      p += 4;
    } else {
      if (flags & 0x0002) {
        arg1 = static_cast<std::int8_t>(r.u8(p));
        arg2 = static_cast<std::int8_t>(r.u8(p + 1));
      } else {
        uarg1 = r.u8(p);
        uarg2 = r.u8(p + 1);
      }
      p += 2;
    }
    auto f2dot14 = [&](std::size_t at) { return r.s16(at) / 16384.0; };
    double a = 1, b = 0, c = 0, d = 1;
    if (flags & 0x0008) {
      a = d = f2dot14(p);
      p += 2;
    } else if (flags & 0x0040) {
      a = f2dot14(p);
      d = f2dot14(p + 2);
      p += 4;
    } else if (flags & 0x0080) {
      a = f2dot14(p);
      b = f2dot14(p + 2);
      c = f2dot14(p + 4);
      d = f2dot14(p + 6);
      p += 8;
    }
    if (child >= num_glyphs_) throw FontParseError("composite references missing glyph");
    std::vector<Contour> part;
    outline(child, depth + 1, part);
    for (auto& contour : part) {
      for (auto& pt : contour.pts) {
        const double x = pt.x, y = pt.y;
        pt.x = a * x + c * y;
        pt.y = b * x + d * y;
      }
    }
    double dx = 0, dy = 0;
    if (flags & 0x0002) {
      dx = arg1;
      dy = arg2;
      if ((flags & 0x0800) && !(flags & 0x1000)) {
        const double tx = a * dx + c * dy, ty = b * dx + d * dy;
        dx = tx;
        dy = ty;
      }
    } else {
      // Point matching: align child point uarg2 with already-placed point uarg1.
      auto nth = [](const std::vector<Contour>& cs, int n) -> const Contour::Pt* {
        for (const auto& ct : cs) {
          if (n < static_cast<int>(ct.pts.size())) return &ct.pts[static_cast<std::size_t>(n)];
          n -= static_cast<int>(ct.pts.size());
        }
        return nullptr;
      };
      const auto* parent_pt = nth(out, uarg1);
      const auto* child_pt = nth(part, uarg2);
      if (parent_pt == nullptr || child_pt == nullptr) throw FontParseError("bad composite anchor point");
      dx = parent_pt->x - child_pt->x;
      dy = parent_pt->y - child_pt->y;
    }
    for (auto& contour : part) {
      for (auto& pt : contour.pts) {
        pt.x += dx;
        pt.y += dy;
      }
      out.push_back(std::move(contour));
    }
    if (!(flags & 0x0020)) break;
  }
}

std::optional<GlyphBounds> FontFace::glyph_bounds(std::uint16_t gid) const {
  if (gid >= num_glyphs_) throw FontParseError("glyph id out of range");
  const Reader r(*bytes_);
  if (cff_) {
    const std::size_t fd = cff_->fd_of_glyph.empty() ? 0 : cff_->fd_of_glyph[gid];
    static const CffIndex empty;
    const CffIndex& local = fd < cff_->local_subrs.size() ? cff_->local_subrs[fd] : empty;
    CharstringBounds interp(r, *cff_, local);
    return interp.run(gid);
  }

  std::vector<Contour> contours;
  outline(gid, 0, contours);
  BoundsAccumulator acc;
  for (const auto& contour : contours) {
    const auto& pts = contour.pts;
    if (pts.empty()) continue;
    // Insert implied on-curve midpoints so every off-curve point sits
    // between two on-curve points.
    std::vector<Contour::Pt> seq;
    seq.reserve(pts.size() * 2);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto& cur = pts[k];
      const auto& nxt = pts[(k + 1) % pts.size()];
      seq.push_back(cur);
      if (!cur.on && !nxt.on) seq.push_back({(cur.x + nxt.x) / 2, (cur.y + nxt.y) / 2, true});
    }
    const auto first_on = std::find_if(seq.begin(), seq.end(), [](const auto& q) { return q.on; });
    if (first_on == seq.end()) continue;  // single off-curve point: no ink
    std::rotate(seq.begin(), first_on, seq.end());
    acc.add(seq[0].x, seq[0].y);
    const std::size_t n = seq.size();
    for (std::size_t k = 0; k < n;) {
      const auto& p0 = seq[k];
      const auto& p1 = seq[(k + 1) % n];
      if (p1.on) {
        acc.add(p1.x, p1.y);
        k += 1;
      } else {
        const auto& p2 = seq[(k + 2) % n];
        acc.quad(p0.x, p0.y, p1.x, p1.y, p2.x, p2.y);
        k += 2;
      }
    }
  }
  return acc.result();
}

}  // namespace vicorpus::fonts
