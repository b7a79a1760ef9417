#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vicorpus::utf8 {

/// Decodes UTF-8; each byte of an invalid sequence start becomes U+FFFD.
std::vector<char32_t> decode(std::string_view s);

void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

/// First scalar of `s`, or U+FFFD when `s` is empty or malformed.
char32_t first_scalar(std::string_view s);

/// Unicode White_Space plus C0/C1 controls, ZWSP and BOM.
bool is_space_or_control(char32_t cp);

}  // namespace vicorpus::utf8
