#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vicorpus {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace vicorpus

namespace vicorpus::base64 {

std::string encode(std::span<const std::uint8_t> data);
std::string encode(std::string_view data);
/// Throws vicorpus::Error on malformed input.
std::vector<std::uint8_t> decode(std::string_view text);

}  // namespace vicorpus::base64
