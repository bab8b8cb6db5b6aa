#pragma once

// One extraction function per metadata source. Every function here is pure:
// the same document bytes always give the same fragments, and none of them
// throws on malformed input (extract_feed's FeedParseError is the one
// declared exception).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "greyharvest/document.hpp"
#include "greyharvest/html.hpp"
#include "greyharvest/model.hpp"

namespace greyharvest {

struct MetaTag {
  std::string key;  // lowercased name= or property= value
  std::string content;
};

/// An HTML document parsed once and shared by all HTML extractors.
struct ParsedPage {
  std::string request_uri;
  std::string final_uri;
  Timestamp fetched_at{};
  html::Document dom;
  std::vector<MetaTag> metas;  // document order; a tag with both name and property appears twice

  static ParsedPage parse(const SourceDocument& doc);

  std::vector<std::string> meta_values(std::string_view key) const;
  std::optional<std::string> first_meta(std::string_view key) const;
};

struct ExtractionResult {
  std::vector<MetadataFragment> fragments;
  std::vector<std::string> author_pages;  // OGP article:author URIs to fetch
  std::vector<std::string> warnings;

  void append(ExtractionResult other);
};

/// Returns a fragment for `fields` scored with the default weight table,
/// or nullopt when fields is empty.
std::optional<MetadataFragment> make_fragment(SourceKind source, FieldValues fields,
                                              Timestamp observed_at);

ExtractionResult extract_html_title(const ParsedPage& page);
ExtractionResult extract_dublin_core(const ParsedPage& page);
ExtractionResult extract_google_scholar(const ParsedPage& page);
ExtractionResult extract_ogp(const ParsedPage& page);
ExtractionResult extract_coins(const ParsedPage& page);
ExtractionResult extract_prism(const ParsedPage& page);
ExtractionResult extract_eprints(const ParsedPage& page);
ExtractionResult extract_twitter_card(const ParsedPage& page);
ExtractionResult extract_generic_meta(const ParsedPage& page);
ExtractionResult extract_schema_org(const ParsedPage& page);

/// Every built-in HTML extractor above, in a fixed order.
ExtractionResult extract_html_all(const ParsedPage& page);

/// Author name from an OGP author page: og:title, else profile names, else
/// the HTML title.
std::optional<std::string> extract_author_page_name(const ParsedPage& page);

/// Advertised feed (link rel="alternate" with an RSS or Atom type), resolved.
std::optional<std::string> discover_feed(const ParsedPage& page);

struct FeedEntry {
  std::string uri;  // normalized entry URI
  MetadataFragment fragment;
};

struct FeedInfo {
  std::optional<std::string> container;
  std::optional<std::string> common_author;  // set iff every entry has exactly this one author
};

struct FeedExtraction {
  std::vector<FeedEntry> entries;
  FeedInfo info;
};

/// RSS 2.0, RSS 1.0 and Atom. Throws FeedParseError on malformed XML.
FeedExtraction extract_feed(const SourceDocument& doc);

/// Date from /YYYY/MM[/DD] path segments, year in [1990, current_year + 1].
std::optional<MetadataFragment> infer_date_from_uri(std::string_view uri, int current_year,
                                                    Timestamp observed_at = Timestamp{});
std::optional<MetadataFragment> infer_date_from_uri(std::string_view uri);

/// Title and Author from the PDF document information dictionary. Any
/// failure (encryption, compression, truncation) gives no fragments.
ExtractionResult extract_pdf_info(const SourceDocument& doc);

}  // namespace greyharvest
