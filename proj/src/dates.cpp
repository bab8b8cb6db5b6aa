#include "greyharvest/dates.hpp"

#include <array>

#include "greyharvest/text.hpp"

namespace greyharvest {

namespace {

// Reads between min_digits and max_digits ASCII digits at pos.
std::optional<int> read_number(std::string_view s, std::size_t& pos, std::size_t min_digits,
                               std::size_t max_digits) {
  std::size_t start = pos;
  int value = 0;
  while (pos < s.size() && pos - start < max_digits && text::is_ascii_digit(s[pos])) {
    value = value * 10 + (s[pos] - '0');
    ++pos;
  }
  if (pos - start < min_digits) {
    pos = start;
    return std::nullopt;
  }
  return value;
}

bool digit_at(std::string_view s, std::size_t pos) {
  return pos < s.size() && text::is_ascii_digit(s[pos]);
}

std::optional<PartialDate> parse_iso(std::string_view s, int min_year) {
  std::size_t pos = 0;
  auto year = read_number(s, pos, 4, 4);
  if (!year || digit_at(s, pos)) return std::nullopt;
  if (pos == s.size() || s[pos] != '-') {
    // Bare year must stand alone or be followed by a time designator.
    if (pos == s.size() || s[pos] == 'T' || text::is_space(s[pos])) {
      return PartialDate::make(*year, std::nullopt, std::nullopt, min_year);
    }
    return std::nullopt;
  }
  ++pos;
  auto month = read_number(s, pos, 2, 2);
  if (!month || digit_at(s, pos)) return std::nullopt;
  if (pos == s.size() || s[pos] != '-') {
    if (pos == s.size() || s[pos] == 'T' || text::is_space(s[pos])) {
      return PartialDate::make(*year, *month, std::nullopt, min_year);
    }
    return std::nullopt;
  }
  ++pos;
  auto day = read_number(s, pos, 2, 2);
  if (!day || digit_at(s, pos)) return std::nullopt;
  if (pos != s.size() && s[pos] != 'T' && s[pos] != 't' && !text::is_space(s[pos]) &&
      s[pos] != 'Z' && s[pos] != '+') {
    return std::nullopt;
  }
  return PartialDate::make(*year, *month, *day, min_year);
}

std::optional<int> month_from_name(std::string_view word) {
  static constexpr std::array<std::string_view, 12> kNames = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  std::string lower = text::to_lower(word);
  if (lower.size() < 3) return std::nullopt;
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (lower == kNames[i] || lower == kNames[i].substr(0, 3) ||
        (lower == "sept" && i == 8)) {
      return static_cast<int>(i + 1);
    }
  }
  return std::nullopt;
}

std::string_view read_word(std::string_view s, std::size_t& pos) {
  std::size_t start = pos;
  while (pos < s.size() && text::is_ascii_alpha(s[pos])) ++pos;
  return s.substr(start, pos - start);
}

void skip_spaces(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && text::is_space(s[pos])) ++pos;
}

std::optional<PartialDate> parse_rfc822(std::string_view s, int min_year) {
  std::size_t pos = 0;
  if (pos < s.size() && text::is_ascii_alpha(s[pos])) {
    std::string_view weekday = read_word(s, pos);
    if (weekday.size() < 3) return std::nullopt;
    if (pos < s.size() && s[pos] == ',') ++pos;
    skip_spaces(s, pos);
  }
  auto day = read_number(s, pos, 1, 2);
  if (!day || digit_at(s, pos)) return std::nullopt;
  if (pos >= s.size() || !(text::is_space(s[pos]) || s[pos] == '-')) return std::nullopt;
  ++pos;
  skip_spaces(s, pos);
  auto month = month_from_name(read_word(s, pos));
  if (!month) return std::nullopt;
  if (pos < s.size() && s[pos] == '.') ++pos;
  if (pos >= s.size() || !(text::is_space(s[pos]) || s[pos] == '-')) return std::nullopt;
  ++pos;
  skip_spaces(s, pos);
  std::size_t year_start = pos;
  auto year = read_number(s, pos, 2, 4);
  if (!year || digit_at(s, pos)) return std::nullopt;
  if (pos - year_start == 3) return std::nullopt;
  if (pos - year_start == 2) *year += *year < 50 ? 2000 : 1900;
  if (pos != s.size() && !text::is_space(s[pos])) return std::nullopt;
  return PartialDate::make(*year, *month, *day, min_year);
}

std::optional<PartialDate> parse_slashed(std::string_view s, int min_year) {
  std::size_t pos = 0;
  auto year = read_number(s, pos, 4, 4);
  if (!year || pos >= s.size() || s[pos] != '/') return std::nullopt;
  ++pos;
  auto month = read_number(s, pos, 1, 2);
  if (!month || digit_at(s, pos)) return std::nullopt;
  std::optional<int> day;
  if (pos < s.size() && s[pos] == '/') {
    ++pos;
    if (pos < s.size()) {
      day = read_number(s, pos, 1, 2);
      if (!day || digit_at(s, pos)) return std::nullopt;
    }
  }
  if (pos != s.size() && !text::is_space(s[pos])) return std::nullopt;
  return PartialDate::make(*year, *month, day, min_year);
}

}  // namespace

std::optional<PartialDate> parse_date(std::string_view raw, int min_year) {
  std::string_view s = text::trim(raw);
  if (s.empty() || s.size() > 128) return std::nullopt;
  if (auto d = parse_iso(s, min_year)) return d;
  if (auto d = parse_rfc822(s, min_year)) return d;
  if (auto d = parse_slashed(s, min_year)) return d;
  return std::nullopt;
}

}  // namespace greyharvest
