#pragma once

#include <optional>
#include <string_view>

#include "greyharvest/model.hpp"

namespace greyharvest {

/// Lenient publication-date parser. Tries, in order: an ISO-8601 prefix
/// (YYYY, YYYY-MM, YYYY-MM-DD, optionally followed by a time), RFC-822
/// ("Tue, 14 Feb 2012 10:00:00 +0000", weekday optional, full month names
/// accepted), YYYY/MM[/DD]. Anything else yields nullopt.
std::optional<PartialDate> parse_date(std::string_view text, int min_year = 1000);

}  // namespace greyharvest
