#pragma once

#include <array>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "greyharvest/document.hpp"
#include "greyharvest/extractors.hpp"
#include "greyharvest/model.hpp"
#include "greyharvest/scoring.hpp"
#include "greyharvest/site_rules.hpp"

namespace greyharvest {

class Store;

/// Per-field merge. For each field the populated fragment with the highest
/// weight wins; ties go to the earlier SourceKind, then the newer
/// observation, then the smaller value, so the result does not depend on
/// fragment order. Blocklisted authors are dropped before competing.
BibRecord merge(const std::vector<MetadataFragment>& fragments, const ScoreTable& table,
                const std::string& uri, Timestamp retrieved_at);

/// Removes a leading or trailing site-name segment split off by the first
/// delimiter present in the title. Never returns an empty string.
std::string strip_site_title(std::string_view title, const std::optional<std::string>& container,
                             std::string_view host,
                             const std::vector<std::string>& delimiters =
                                 ScoreTable::defaults().title_delimiters());

std::vector<Person> filter_authors(std::vector<Person> authors,
                                   const std::set<std::string>& blocklist);

/// Author and container for target_uri inferred from its feed siblings.
/// The author is inferred only when every sibling with a usable author has
/// exactly that one author. Dates are never inferred.
std::optional<MetadataFragment> infer_from_siblings(std::string_view target_uri,
                                                    const FeedExtraction& feed,
                                                    const std::set<std::string>& blocklist,
                                                    Timestamp observed_at);

struct ResolverOptions {
  ScoreTable table = ScoreTable::defaults();
  std::vector<SiteRule> rules;
  bool follow_feeds = true;
  bool follow_author_pages = true;
};

struct ResolveTrace {
  BibRecord record;
  std::vector<MetadataFragment> fragments;  // everything that competed in the merge
  std::vector<std::string> warnings;
  std::optional<std::uint64_t> stored_version;  // set when a new version was written
};

class Resolver {
 public:
  Resolver(DocumentSource& source, ResolverOptions options, Store* store = nullptr,
           Clock clock = system_now);

  /// Fetch, extract, merge and (with a store) persist. Fetch errors of the
  /// primary document propagate; everything after that degrades to warnings.
  BibRecord resolve(std::string_view uri);
  ResolveTrace resolve_traced(std::string_view uri);

  /// Same pipeline for an already-fetched primary document.
  ResolveTrace resolve_document(const SourceDocument& doc);

  const ResolverOptions& options() const { return options_; }

 private:
  ResolveTrace run(const SourceDocument& doc);
  std::optional<SourceDocument> fetch_secondary(const std::string& uri, ResolveTrace& trace);

  DocumentSource& source_;
  ResolverOptions options_;
  Store* store_;
  Clock clock_;
  std::array<std::mutex, 32> uri_locks_;
};

}  // namespace greyharvest
