#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "vicorpus/error.hpp"
#include "vicorpus/resources.hpp"
#include "vicorpus/viz.hpp"

namespace vicorpus::viz {

namespace {

const nlohmann::json& bundled() {
  static const auto j = nlohmann::json::parse(resources::colormaps());
  return j;
}

Rgb parse_hex(const std::string& s) {
  if (s.size() != 6) throw Error("bad colormap entry '" + s + "'");
  const auto v = std::stoul(s, nullptr, 16);
  return {static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

}  // namespace

Level parse_level(const std::string& name) {
  if (name == "char") return Level::character;
  if (name == "word") return Level::word;
  if (name == "line") return Level::line;
  if (name == "paragraph") return Level::paragraph;
  if (name == "region") return Level::region;
  throw UsageError("unknown level '" + name + "' (char, word, line, paragraph, region)");
}

std::string to_string(Level level) {
  switch (level) {
    case Level::character: return "char";
    case Level::word: return "word";
    case Level::line: return "line";
    case Level::paragraph: return "paragraph";
    case Level::region: return "region";
  }
  return "?";
}

Rgb Colormap::at(double t) const {
  if (lut.empty()) throw Error("empty colormap");
  t = std::clamp(t, 0.0, 1.0);
  const auto i = static_cast<std::size_t>(std::lround(t * static_cast<double>(lut.size() - 1)));
  return lut[i];
}

Colormap colormap(const std::string& name) {
  const auto& all = bundled();
  auto it = all.find(name);
  if (it == all.end()) {
    std::string known;
    for (const auto& n : colormap_names()) known += (known.empty() ? "" : ", ") + n;
    throw UsageError("unknown colormap '" + name + "' (" + known + ")");
  }
  Colormap m{name, {}};
  for (const auto& e : *it) m.lut.push_back(parse_hex(e.get<std::string>()));
  return m;
}

std::vector<std::string> colormap_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : bundled().items()) out.push_back(k);
  return out;
}

int stroke_width(int width, int height) {
  return std::max(1, static_cast<int>(std::lround(std::min(width, height) / 800.0)));
}

std::vector<Quad> level_quads(const dataset::DocumentRecord& r, Level level) {
  std::vector<Quad> out;
  switch (level) {
    case Level::character:
      for (const auto& c : r.chars) out.push_back(c.quad);
      break;
    case Level::word:
      for (const auto& w : r.words) out.push_back(w.quad);
      break;
    case Level::line:
      for (const auto& l : r.lines) out.push_back(l.quad);
      break;
    case Level::paragraph:
      for (const auto& p : r.paragraphs) out.push_back(p.quad);
      break;
    case Level::region:
      for (const auto& g : r.regions) out.push_back(g.quad);
      break;
  }
  return out;
}

Rgb rank_color(const Colormap& map, std::size_t rank, std::size_t n) {
  if (n <= 1) return map.at(0);
  return map.at(static_cast<double>(rank) / static_cast<double>(n - 1));
}

image::Image render_overlay(const dataset::DocumentRecord& record, const image::Image& img, Level level,
                            const Colormap& map) {
  image::Image out = img;
  if (img.width <= 0 || img.height <= 0) return out;
  const auto quads = level_quads(record, level);
  const int s = stroke_width(img.width, img.height);
  for (std::size_t i = 0; i < quads.size(); ++i) {
    const Rgb color = rank_color(map, i, quads.size());
    const Rect b = quads[i].bounds();
    // Pixel span covered by the box, at least one pixel wide and tall.
    const int x0 = std::clamp(static_cast<int>(std::floor(b.left())), 0, img.width - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(b.top())), 0, img.height - 1);
    const int x1 = std::clamp(static_cast<int>(std::ceil(b.right())) - 1, x0, img.width - 1);
    const int y1 = std::clamp(static_cast<int>(std::ceil(b.bottom())) - 1, y0, img.height - 1);
    for (int y = y0; y <= y1; ++y) {
      const bool edge_row = y < y0 + s || y > y1 - s;
      for (int x = x0; x <= x1; ++x) {
        if (!edge_row && x >= x0 + s && x <= x1 - s) {
          x = x1 - s;
          continue;
        }
        std::uint8_t* px = out.at(x, y);
        px[0] = color[0];
        px[1] = color[1];
        px[2] = color[2];
      }
    }
  }
  return out;
}

}  // namespace vicorpus::viz

namespace vicorpus::viz {

std::vector<std::filesystem::path> render_files(const VizRequest& req) {
  namespace fs = std::filesystem;
  if (req.levels.empty()) throw UsageError("no overlay level given");
  std::ifstream in(req.record, std::ios::binary);
  if (!in) throw InputError("cannot read record " + req.record.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw InputError(req.record.string() + " is not JSON");
  if (const auto problems = dataset::record_schema_violations(j); !problems.empty()) {
    throw InputError(req.record.string() + " is not a valid record: " + problems.front());
  }
  const auto record = dataset::record_from_json(j);
  // annots/<shard>/<id>.json -> corpus root
  const fs::path image_path =
      req.image ? *req.image : fs::absolute(req.record).parent_path().parent_path().parent_path() / record.image;
  if (!fs::exists(image_path)) throw InputError("image not found: " + image_path.string());
  const image::Image img = image::read_file(image_path);
  const Colormap map = colormap(req.colormap);

  const auto ext = req.out.extension().string();
  const bool single_file = req.levels.size() == 1 && (ext == ".png" || ext == ".jpg" || ext == ".jpeg");
  if (!single_file) fs::create_directories(req.out);
  std::vector<fs::path> written;
  for (Level level : req.levels) {
    const image::Image overlay = render_overlay(record, img, level, map);
    fs::path out = single_file
                       ? req.out
                       : req.out / (dataset::encode_doc_id(record.doc_id) + "." + to_string(level) + ".png");
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    const auto format = (ext == ".jpg" || ext == ".jpeg") && single_file ? image::Format::jpeg : image::Format::png;
    const auto bytes = image::encode(overlay, format, 95);
    dataset::write_file_atomic(out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    written.push_back(std::move(out));
  }
  return written;
}

}  // namespace vicorpus::viz
