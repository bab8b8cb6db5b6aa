#include "greyharvest/resolver.hpp"

#include <algorithm>

#include "greyharvest/error.hpp"
#include "greyharvest/store.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest {

namespace {

std::string value_key(const FieldValues& v, Field field) {
  switch (field) {
    case Field::kTitle: return v.title.value_or("");
    case Field::kContainer: return v.container.value_or("");
    case Field::kCanonicalUri: return v.canonical_uri.value_or("");
    case Field::kIssued: return v.issued ? v.issued->iso() : "";
    case Field::kAuthors: {
      std::string out;
      for (const auto& p : v.authors) {
        out += p.literal;
        out.push_back('\x1f');
      }
      return out;
    }
  }
  return {};
}

void copy_field(BibRecord& record, const FieldValues& v, Field field) {
  switch (field) {
    case Field::kTitle: record.title = v.title; break;
    case Field::kAuthors: record.authors = v.authors; break;
    case Field::kIssued: record.issued = v.issued; break;
    case Field::kContainer: record.container = v.container; break;
    case Field::kCanonicalUri: record.canonical_uri = v.canonical_uri; break;
  }
}

bool entry_matches(const FeedEntry& e, std::string_view a, std::string_view b) {
  return e.uri == a || e.uri == b ||
         (e.fragment.fields.canonical_uri && (*e.fragment.fields.canonical_uri == a ||
                                              *e.fragment.fields.canonical_uri == b));
}

int year_of(Timestamp t) {
  return static_cast<int>(std::chrono::year_month_day(std::chrono::floor<std::chrono::days>(t)).year());
}

}  // namespace

std::vector<Person> filter_authors(std::vector<Person> authors,
                                   const std::set<std::string>& blocklist) {
  authors.erase(std::remove_if(authors.begin(), authors.end(),
                               [&](const Person& p) {
                                 return blocklist.count(text::to_lower(
                                            text::collapse_whitespace(p.literal))) > 0;
                               }),
                authors.end());
  return authors;
}

BibRecord merge(const std::vector<MetadataFragment>& fragments, const ScoreTable& table,
                const std::string& uri, Timestamp retrieved_at) {
  std::vector<FieldValues> values;
  values.reserve(fragments.size());
  for (const auto& f : fragments) {
    FieldValues v = f.fields;
    v.authors = filter_authors(std::move(v.authors), table.author_blocklist());
    values.push_back(std::move(v));
  }

  BibRecord record;
  record.uri = uri;
  record.retrieved_at = retrieved_at;
  for (Field field : kAllFields) {
    std::optional<std::size_t> best;
    int best_weight = 0;
    std::string best_value;
    for (std::size_t i = 0; i < fragments.size(); ++i) {
      if (!values[i].has(field)) continue;
      int w = table.weight(fragments[i].source, field);
      if (w <= 0) continue;
      std::string value = value_key(values[i], field);
      bool better = false;
      if (!best || w > best_weight) {
        better = true;
      } else if (w == best_weight) {
        const auto& cur = fragments[*best];
        const auto& cand = fragments[i];
        if (cand.source != cur.source) {
          better = cand.source < cur.source;
        } else if (cand.observed_at != cur.observed_at) {
          better = cand.observed_at > cur.observed_at;
        } else {
          better = value < best_value;
        }
      }
      if (better) {
        best = i;
        best_weight = w;
        best_value = std::move(value);
      }
    }
    if (best) {
      copy_field(record, values[*best], field);
      record.provenance[field] = fragments[*best].source;
    }
  }
  return record;
}

std::string strip_site_title(std::string_view title_in, const std::optional<std::string>& container,
                             std::string_view host, const std::vector<std::string>& delimiters) {
  std::string title(title_in);
  std::vector<std::string> names;
  if (container && !container->empty()) names.push_back(text::collapse_whitespace(*container));
  if (!host.empty()) {
    std::string h = text::to_lower(host);
    std::string domain = registrable_domain(h);
    names.push_back(h);
    names.push_back(domain);
    names.push_back(domain.substr(0, domain.find('.')));
  }
  auto is_site_name = [&](std::string_view segment) {
    std::string s = text::collapse_whitespace(segment);
    if (s.empty()) return false;
    return std::any_of(names.begin(), names.end(),
                       [&](const std::string& n) { return !n.empty() && text::iequals(s, n); });
  };

  for (const auto& delim : delimiters) {
    std::size_t first = title.find(delim);
    if (first == std::string::npos) continue;
    std::size_t last = title.rfind(delim);
    std::string head = title.substr(0, last);
    std::string tail = title.substr(last + delim.size());
    if (is_site_name(tail) && !text::collapse_whitespace(head).empty()) {
      return std::string(text::trim(head));
    }
    std::string lead = title.substr(0, first);
    std::string rest = title.substr(first + delim.size());
    if (is_site_name(lead) && !text::collapse_whitespace(rest).empty()) {
      return std::string(text::trim(rest));
    }
    return title;
  }
  return title;
}

std::optional<MetadataFragment> infer_from_siblings(std::string_view target_uri,
                                                    const FeedExtraction& feed,
                                                    const std::set<std::string>& blocklist,
                                                    Timestamp observed_at) {
  const FeedEntry* target = nullptr;
  std::optional<std::string> common;
  bool unanimous = true;
  std::size_t voters = 0;
  for (const auto& entry : feed.entries) {
    if (!target && entry_matches(entry, target_uri, target_uri)) {
      target = &entry;
      continue;
    }
    auto authors = filter_authors(entry.fragment.fields.authors, blocklist);
    if (authors.empty()) continue;
    ++voters;
    if (authors.size() != 1 || (common && *common != authors.front().literal)) {
      unanimous = false;
    } else if (!common) {
      common = authors.front().literal;
    }
  }

  FieldValues fields;
  bool target_has_author =
      target && !filter_authors(target->fragment.fields.authors, blocklist).empty();
  if (!target_has_author && unanimous && voters > 0 && common) {
    fields.authors.push_back(Person::from_literal(*common));
  }
  if (!(target && target->fragment.fields.container) && feed.info.container) {
    fields.container = feed.info.container;
  }
  return make_fragment(SourceKind::kFeedInference, std::move(fields), observed_at);
}

Resolver::Resolver(DocumentSource& source, ResolverOptions options, Store* store, Clock clock)
    : source_(source), options_(std::move(options)), store_(store), clock_(std::move(clock)) {}

BibRecord Resolver::resolve(std::string_view uri) { return resolve_traced(uri).record; }

ResolveTrace Resolver::resolve_traced(std::string_view uri) {
  std::string normalized = normalize_uri(uri);
  std::mutex& lock = store_ ? store_->writer_lock(normalized)
                            : uri_locks_[std::hash<std::string>{}(normalized) % uri_locks_.size()];
  std::lock_guard guard(lock);
  SourceDocument doc = source_.fetch(normalized);
  if (doc.request_uri.empty()) doc.request_uri = normalized;
  if (doc.final_uri.empty()) doc.final_uri = doc.request_uri;
  return run(doc);
}

ResolveTrace Resolver::resolve_document(const SourceDocument& doc_in) {
  SourceDocument doc = doc_in;
  doc.request_uri = normalize_uri(doc.request_uri);
  doc.final_uri = doc.final_uri.empty() ? doc.request_uri : normalize_uri(doc.final_uri);
  std::mutex& lock = store_ ? store_->writer_lock(doc.request_uri)
                            : uri_locks_[std::hash<std::string>{}(doc.request_uri) % uri_locks_.size()];
  std::lock_guard guard(lock);
  return run(doc);
}

std::optional<SourceDocument> Resolver::fetch_secondary(const std::string& uri, ResolveTrace& trace) {
  try {
    return source_.fetch(uri);
  } catch (const std::exception& e) {
    trace.warnings.push_back("secondary fetch of " + uri + " failed: " + e.what());
    return std::nullopt;
  }
}

ResolveTrace Resolver::run(const SourceDocument& doc) {
  ResolveTrace trace;
  const ScoreTable& table = options_.table;
  const std::string& uri = doc.request_uri;
  const std::string& final_uri = doc.final_uri;
  Timestamp now = clock_();
  std::vector<MetadataFragment> fragments;
  std::optional<FeedExtraction> feed;
  std::string host;
  try {
    host = uri_host(final_uri);
  } catch (const std::exception&) {
  }

  auto take = [&](ExtractionResult r) {
    for (auto& f : r.fragments) fragments.push_back(std::move(f));
    for (auto& w : r.warnings) trace.warnings.push_back(std::move(w));
    return std::move(r.author_pages);
  };

  if (doc.media_type == MediaType::kHtml) {
    ParsedPage page = ParsedPage::parse(doc);
    auto author_pages = take(extract_html_all(page));
    take(apply_site_rules(page, options_.rules));

    if (options_.follow_author_pages && !author_pages.empty()) {
      if (auto author_doc = fetch_secondary(author_pages.front(), trace)) {
        std::optional<std::string> name;
        if (author_doc->media_type == MediaType::kHtml) {
          name = extract_author_page_name(ParsedPage::parse(*author_doc));
        }
        if (name) {
          auto ogp = std::find_if(fragments.begin(), fragments.end(), [](const MetadataFragment& f) {
            return f.source == SourceKind::kOgp;
          });
          if (ogp != fragments.end()) {
            ogp->fields.authors.push_back(Person::from_literal(*name));
            ogp->score = table.score(SourceKind::kOgp, ogp->fields);
          } else {
            FieldValues fields;
            fields.authors.push_back(Person::from_literal(*name));
            if (auto f = make_fragment(SourceKind::kOgp, std::move(fields), doc.fetched_at)) {
              fragments.push_back(std::move(*f));
            }
          }
        } else {
          trace.warnings.push_back("no author name on " + author_pages.front());
        }
      }
    }

    if (options_.follow_feeds) {
      if (auto feed_uri = discover_feed(page)) {
        if (auto feed_doc = fetch_secondary(*feed_uri, trace)) {
          try {
            feed = extract_feed(*feed_doc);
          } catch (const FeedParseError& e) {
            trace.warnings.push_back(e.what());
          }
        }
      }
    }
  } else if (doc.media_type == MediaType::kXmlFeed) {
    try {
      feed = extract_feed(doc);
    } catch (const FeedParseError& e) {
      trace.warnings.push_back(e.what());
    }
  } else if (doc.media_type == MediaType::kPdf) {
    take(extract_pdf_info(doc));
    if (has_link_context_rule(host, options_.rules)) {
      if (auto index_uri = try_resolve_reference(final_uri, "./")) {
        if (auto index_doc = fetch_secondary(*index_uri, trace)) {
          if (index_doc->media_type == MediaType::kHtml) {
            try {
              take(extract_link_context(final_uri, ParsedPage::parse(*index_doc), options_.rules));
            } catch (const LinkNotFound& e) {
              trace.warnings.push_back(e.what());
            }
          }
        }
      }
    }
  }

  if (feed) {
    std::vector<MetadataFragment> entry_fragments;
    for (const auto& entry : feed->entries) {
      if (store_) store_->put_feed_fragment(entry.uri, entry.fragment);
      if (entry_matches(entry, uri, final_uri)) entry_fragments.push_back(entry.fragment);
    }
    if (!store_) {
      for (auto& f : entry_fragments) fragments.push_back(std::move(f));
    }
    if (auto inferred = infer_from_siblings(uri, *feed, table.author_blocklist(), doc.fetched_at)) {
      fragments.push_back(std::move(*inferred));
    }
  }
  if (store_) {
    // Feed entries outlive the feed window: use everything ever observed.
    for (const std::string& key : {uri, final_uri}) {
      for (auto& f : store_->get_feed_fragments(key)) fragments.push_back(std::move(f));
      if (final_uri == uri) break;
    }
  }

  int current_year = year_of(now);
  auto dated = infer_date_from_uri(uri, current_year, doc.fetched_at);
  if (!dated && final_uri != uri) dated = infer_date_from_uri(final_uri, current_year, doc.fetched_at);
  if (dated) fragments.push_back(std::move(*dated));

  for (auto& f : fragments) {
    f.score = table.score(f.source, f.fields);
  }

  // HTML titles often carry the site name; strip it using the container the
  // merge settles on (merge is per-field, so this is the final container).
  BibRecord provisional = merge(fragments, table, uri, now);
  for (auto& f : fragments) {
    if (f.source == SourceKind::kHtmlTitle && f.fields.title) {
      f.fields.title = strip_site_title(*f.fields.title, provisional.container, host,
                                        table.title_delimiters());
    }
  }
  trace.record = merge(fragments, table, uri, now);
  trace.fragments = std::move(fragments);

  if (store_) {
    trace.record.archives = store_->get_archives(uri).snapshots;
    auto latest = store_->get_latest(uri);
    if (!latest || !latest->same_content(trace.record)) {
      trace.stored_version = store_->put_extraction(uri, trace.record);
    }
  }
  return trace;
}

}  // namespace greyharvest
