#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vicorpus/dataset.hpp"
#include "vicorpus/image.hpp"

namespace vicorpus::viz {

enum class Level { character, word, line, paragraph, region };

Level parse_level(const std::string& name);  // char, word, line, paragraph, region
std::string to_string(Level level);

using Rgb = std::array<std::uint8_t, 3>;

struct Colormap {
  std::string name;
  std::vector<Rgb> lut;  // 256 entries for the bundled maps

  /// t in [0, 1], nearest entry.
  Rgb at(double t) const;
};

/// Bundled 256-entry maps (viridis, plasma, magma, inferno, cividis, turbo).
Colormap colormap(const std::string& name);
std::vector<std::string> colormap_names();

/// max(1, round(min(w, h) / 800))
int stroke_width(int width, int height);

/// Quads of one level in reading order.
std::vector<Quad> level_quads(const dataset::DocumentRecord& record, Level level);

/// Color of the box ranked `rank` out of `n`: map(rank / (n - 1)), map(0) when n = 1.
Rgb rank_color(const Colormap& map, std::size_t rank, std::size_t n);

/// Strokes every quad of `level`; later boxes are drawn over earlier ones.
image::Image render_overlay(const dataset::DocumentRecord& record, const image::Image& img, Level level,
                            const Colormap& map);

struct VizRequest {
  std::filesystem::path record;
  /// Default: the record's image path, relative to the corpus root that holds the record.
  std::optional<std::filesystem::path> image;
  std::vector<Level> levels;
  std::string colormap = "viridis";
  /// A .png/.jpg file for a single level, else a directory.
  std::filesystem::path out;
};

/// Writes one overlay per level and returns the paths. Throws InputError
/// when the record or image cannot be read.
std::vector<std::filesystem::path> render_files(const VizRequest& request);

}  // namespace vicorpus::viz
