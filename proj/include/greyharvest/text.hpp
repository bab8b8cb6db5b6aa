#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace greyharvest::text {

std::string_view trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);  // trims too
std::string to_lower(std::string_view s);             // ASCII only
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0);

std::vector<std::string> split(std::string_view s, std::string_view delimiter);
std::string join(const std::vector<std::string>& parts, std::string_view delimiter);

bool is_ascii_digit(char c);
bool is_ascii_alpha(char c);
bool is_space(char c);

void append_utf8(std::string& out, std::uint32_t codepoint);

/// Copies s, replacing every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view s);
bool is_valid_utf8(std::string_view s);

/// Transcodes a body in the named charset to UTF-8. Unknown labels are
/// treated as UTF-8; undecodable bytes become U+FFFD.
std::string to_utf8(std::string_view bytes, std::string_view charset);

}  // namespace greyharvest::text
