#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vicorpus::image {

/// 8-bit RGB raster, row-major, no padding.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t* at(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
};

enum class Format { png, jpeg };

Format parse_format(const std::string& name);
std::string extension(Format f);

/// PNG or JPEG, detected from the magic bytes. Alpha is composited on white.
Image decode(std::span<const std::uint8_t> bytes);
Image read_file(const std::filesystem::path& path);

/// Encoders write no timestamps or text chunks, so output is a pure
/// function of the pixels (and quality).
std::vector<std::uint8_t> encode_png(const Image& img);
std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality);
std::vector<std::uint8_t> encode(const Image& img, Format f, int jpeg_quality);

/// SHA-256 over "width x height" and the RGB bytes.
std::string pixel_hash(const Image& img);

/// Reads just the dimensions from a PNG or JPEG header.
std::pair<int, int> probe_size(const std::filesystem::path& path);

}  // namespace vicorpus::image
