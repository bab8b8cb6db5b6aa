#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace greyharvest {

std::array<std::uint8_t, 32> sha256(std::string_view data);
std::string sha256_hex(std::string_view data);

/// RFC 4648 base32, lowercase alphabet, no padding.
std::string base32_lower(const std::uint8_t* data, std::size_t size);

}  // namespace greyharvest
