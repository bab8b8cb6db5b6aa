#pragma once

#include <optional>
#include <string>
#include <vector>

#include "greyharvest/model.hpp"

namespace greyharvest {

/// Author-supplied corrections applied before emitting markup.
struct RecordOverride {
  std::optional<std::vector<Person>> authors;  // non-empty when present
  std::optional<std::string> container;
};

struct EmbedFormats {
  bool scholar = true;
  bool ogp = true;
  bool coins = true;

  /// Parses "scholar,ogp,coins"; throws ConfigError on unknown names.
  static EmbedFormats parse(std::string_view list);
};

struct Markup {
  std::string head_html;
  std::string body_html;
};

/// Throws MissingTitle when the (overridden) record has no title.
Markup emit_markup(const BibRecord& record, const RecordOverride& override_fields = {},
                   EmbedFormats formats = {});

/// The OpenURL ContextObject carried in a Z3988 span title.
std::string coins_context_object(const BibRecord& record);

}  // namespace greyharvest
