#pragma once

// Data-driven screen scraping. A rule is a JSON document:
//
//   {"id": "w3c", "host_pattern": "*.w3.org", "notes": "...",
//    "entry_scope": "li",                      (optional, for link context)
//    "selectors": {
//      "title":   {"path": "h1", "attr": "content", "regex": "(.*)"},
//      "authors": {"path": "dd.editor", "split": ",", "scope": "entry"}}}
//
// path is a CSS subset (see html::Selector); attr defaults to the element
// text; regex keeps capture group 1 (or the whole match); authors collect
// every match, other fields the first non-empty one.

#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "greyharvest/extractors.hpp"
#include "greyharvest/html.hpp"
#include "greyharvest/json_codec.hpp"

namespace greyharvest {

struct FieldSelector {
  enum class Scope { kDocument, kEntry };

  html::Selector path;
  std::optional<std::string> attr;
  std::optional<std::string> pattern;
  std::optional<std::regex> regex;
  std::optional<std::string> split;
  Scope scope = Scope::kDocument;
};

struct SiteRule {
  std::string id;
  SourceKind source = SourceKind::kSiteRule;  // from id when it names a known source
  std::string host_pattern;
  std::optional<std::string> entry_scope;
  std::vector<std::pair<Field, FieldSelector>> selectors;
  std::string notes;

  bool matches_host(std::string_view host) const;

  /// Throws ConfigError when the rule is malformed or selects a field its
  /// source is not allowed to emit.
  static SiteRule from_json(const json::Json& j);
};

/// Loads every *.json file in dir, sorted by file name.
std::vector<SiteRule> load_site_rules(const std::filesystem::path& dir);

/// Shell-style glob over a host: '*' and '?'; "*.x" also matches "x".
bool host_glob_match(std::string_view pattern, std::string_view host);

ExtractionResult apply_site_rules(const ParsedPage& page, const std::vector<SiteRule>& rules);

/// Harvests metadata for pdf_uri from an index page linking to it, using the
/// first host-matching rule that has an entry_scope. Throws LinkNotFound.
ExtractionResult extract_link_context(std::string_view pdf_uri, const ParsedPage& index,
                                      const std::vector<SiteRule>& rules);

/// True when some rule with an entry_scope covers this host.
bool has_link_context_rule(std::string_view host, const std::vector<SiteRule>& rules);

}  // namespace greyharvest
