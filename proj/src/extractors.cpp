#include "greyharvest/extractors.hpp"

#include "greyharvest/dates.hpp"
#include "greyharvest/scoring.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest {

namespace {

std::optional<std::string> clean(std::string_view s) {
  std::string out = text::collapse_whitespace(s);
  if (out.empty()) return std::nullopt;
  return out;
}

void add_person(std::vector<Person>& people, std::string_view literal) {
  if (auto c = clean(literal)) people.push_back(Person::from_literal(*c));
}

std::optional<PartialDate> first_date(const std::vector<std::string>& candidates) {
  for (const auto& c : candidates) {
    if (auto d = parse_date(c)) return d;
  }
  return std::nullopt;
}

std::optional<std::string> first_clean(const std::vector<std::string>& candidates) {
  for (const auto& c : candidates) {
    if (auto v = clean(c)) return v;
  }
  return std::nullopt;
}

std::string strip_at(std::string s) {
  if (!s.empty() && s[0] == '@') s.erase(0, 1);
  return s;
}

ExtractionResult single(SourceKind source, FieldValues fields, Timestamp observed_at) {
  ExtractionResult r;
  if (auto f = make_fragment(source, std::move(fields), observed_at)) {
    r.fragments.push_back(std::move(*f));
  }
  return r;
}

bool has_token(std::string_view list, std::string_view token) {
  for (const auto& t : text::split(text::to_lower(list), " ")) {
    if (t == token) return true;
  }
  return false;
}

// Namespaced meta families: "dc.title" and "dc:title" are the same key.
std::vector<std::string> family_values(const ParsedPage& page, std::string_view prefix,
                                       std::string_view name) {
  std::vector<std::string> out;
  for (const auto& m : page.metas) {
    if (m.key.size() != prefix.size() + 1 + name.size()) continue;
    if (m.key.compare(0, prefix.size(), prefix) != 0) continue;
    char sep = m.key[prefix.size()];
    if ((sep == '.' || sep == ':') && m.key.compare(prefix.size() + 1, name.size(), name) == 0) {
      out.push_back(m.content);
    }
  }
  return out;
}

}  // namespace

ParsedPage ParsedPage::parse(const SourceDocument& doc) {
  ParsedPage page;
  page.request_uri = doc.request_uri;
  page.final_uri = doc.final_uri.empty() ? doc.request_uri : doc.final_uri;
  page.fetched_at = doc.fetched_at;
  page.dom = html::Document::parse(doc.text());
  for (html::NodeId id : page.dom.elements("meta")) {
    const html::Node& n = page.dom.node(id);
    const std::string* content = n.attr("content");
    if (!content) continue;
    for (const char* attr : {"name", "property"}) {
      if (const std::string* key = n.attr(attr)) {
        std::string k = text::to_lower(text::trim(*key));
        if (!k.empty()) page.metas.push_back({std::move(k), *content});
      }
    }
  }
  return page;
}

std::vector<std::string> ParsedPage::meta_values(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& m : metas) {
    if (m.key == key) out.push_back(m.content);
  }
  return out;
}

std::optional<std::string> ParsedPage::first_meta(std::string_view key) const {
  return first_clean(meta_values(key));
}

void ExtractionResult::append(ExtractionResult other) {
  for (auto& f : other.fragments) fragments.push_back(std::move(f));
  for (auto& a : other.author_pages) author_pages.push_back(std::move(a));
  for (auto& w : other.warnings) warnings.push_back(std::move(w));
}

std::optional<MetadataFragment> make_fragment(SourceKind source, FieldValues fields,
                                              Timestamp observed_at) {
  if (fields.empty()) return std::nullopt;
  MetadataFragment f;
  f.source = source;
  f.score = ScoreTable::defaults().score(source, fields);
  f.fields = std::move(fields);
  f.observed_at = observed_at;
  return f;
}

ExtractionResult extract_html_title(const ParsedPage& page) {
  FieldValues fields;
  auto titles = page.dom.elements("title");
  if (!titles.empty()) fields.title = clean(page.dom.text_content(titles.front()));
  return single(SourceKind::kHtmlTitle, std::move(fields), page.fetched_at);
}

ExtractionResult extract_dublin_core(const ParsedPage& page) {
  FieldValues fields;
  fields.title = first_clean(family_values(page, "dc", "title"));
  for (const auto& c : family_values(page, "dc", "creator")) add_person(fields.authors, c);
  fields.issued = first_date(family_values(page, "dc", "date"));
  fields.container = first_clean(family_values(page, "dc", "publisher"));
  return single(SourceKind::kDublinCore, std::move(fields), page.fetched_at);
}

ExtractionResult extract_google_scholar(const ParsedPage& page) {
  // Plain citation_* names win over their bepress_ twins.
  auto values = [&](std::string_view name) {
    auto v = page.meta_values(name);
    if (v.empty()) v = page.meta_values("bepress_" + std::string(name));
    return v;
  };
  FieldValues fields;
  fields.title = first_clean(values("citation_title"));
  for (const auto& a : values("citation_author")) add_person(fields.authors, a);
  if (fields.authors.empty()) {
    if (auto list = first_clean(values("citation_authors"))) {
      for (const auto& a : text::split(*list, ";")) add_person(fields.authors, a);
    }
  }
  fields.issued = first_date(values("citation_publication_date"));
  if (!fields.issued) fields.issued = first_date(values("citation_date"));
  fields.container = first_clean(values("citation_journal_title"));
  if (!fields.container) fields.container = first_clean(values("citation_conference_title"));
  return single(SourceKind::kGoogleScholar, std::move(fields), page.fetched_at);
}

ExtractionResult extract_ogp(const ParsedPage& page) {
  FieldValues fields;
  fields.title = page.first_meta("og:title");
  fields.container = page.first_meta("og:site_name");
  if (auto url = page.first_meta("og:url")) fields.canonical_uri = try_normalize_uri(*url);
  fields.issued = first_date(page.meta_values("article:published_time"));
  ExtractionResult r;
  for (const auto& raw : page.meta_values("article:author")) {
    auto value = clean(raw);
    if (!value) continue;
    if (text::istarts_with(*value, "http://") || text::istarts_with(*value, "https://")) {
      if (auto uri = try_normalize_uri(*value)) r.author_pages.push_back(*uri);
    } else {
      add_person(fields.authors, *value);
    }
  }
  if (auto f = make_fragment(SourceKind::kOgp, std::move(fields), page.fetched_at)) {
    r.fragments.push_back(std::move(*f));
  }
  return r;
}

ExtractionResult extract_coins(const ParsedPage& page) {
  ExtractionResult r;
  for (html::NodeId id : page.dom.elements("span")) {
    const html::Node& span = page.dom.node(id);
    if (!span.has_class("Z3988")) continue;
    const std::string* title = span.attr("title");
    if (!title) continue;

    std::vector<std::pair<std::string, std::string>> pairs;
    bool ok = true;
    for (const auto& part : text::split(*title, "&")) {
      if (part.empty()) continue;
      auto eq = part.find('=');
      auto key = percent_decode(part.substr(0, eq), true);
      auto value = percent_decode(eq == std::string::npos ? "" : part.substr(eq + 1), true);
      if (!key || !value) {
        ok = false;
        break;
      }
      pairs.emplace_back(*key, text::sanitize_utf8(*value));
    }
    if (!ok) {
      r.warnings.push_back("coins: undecodable ContextObject");
      continue;
    }

    FieldValues fields;
    std::optional<std::string> rft_id, aulast, aufirst;
    for (const auto& [key, value] : pairs) {
      if (key == "rft.atitle" && !fields.title) {
        fields.title = clean(value);
      } else if (key == "rft.au") {
        add_person(fields.authors, value);
      } else if (key == "rft.aulast" && !aulast) {
        aulast = clean(value);
      } else if (key == "rft.aufirst" && !aufirst) {
        aufirst = clean(value);
      } else if (key == "rft.date" && !fields.issued) {
        fields.issued = parse_date(value);
      } else if (key == "rft.jtitle" && !fields.container) {
        fields.container = clean(value);
      } else if (key == "rft_id" && !rft_id) {
        rft_id = clean(value);
      }
    }
    if (fields.authors.empty() && aulast) {
      add_person(fields.authors, aufirst ? *aufirst + " " + *aulast : *aulast);
    }
    if (rft_id) {
      bool absolute = text::istarts_with(*rft_id, "http://") ||
                      text::istarts_with(*rft_id, "https://");
      auto normalized = try_normalize_uri(*rft_id);
      if (normalized && (*normalized == page.final_uri || *normalized == page.request_uri)) {
        fields.canonical_uri = normalized;
      } else if (absolute) {
        continue;  // describes some other work
      }
    }
    if (auto f = make_fragment(SourceKind::kCoins, std::move(fields), page.fetched_at)) {
      r.fragments.push_back(std::move(*f));
      break;
    }
  }
  return r;
}

ExtractionResult extract_prism(const ParsedPage& page) {
  FieldValues fields;
  fields.container = first_clean(family_values(page, "prism", "publicationname"));
  fields.issued = first_date(family_values(page, "prism", "publicationdate"));
  return single(SourceKind::kPrism, std::move(fields), page.fetched_at);
}

ExtractionResult extract_eprints(const ParsedPage& page) {
  FieldValues fields;
  fields.title = first_clean(family_values(page, "eprints", "title"));
  for (const auto& c : family_values(page, "eprints", "creators_name")) add_person(fields.authors, c);
  fields.issued = first_date(family_values(page, "eprints", "date"));
  fields.container = first_clean(family_values(page, "eprints", "publication"));
  return single(SourceKind::kEprints, std::move(fields), page.fetched_at);
}

ExtractionResult extract_twitter_card(const ParsedPage& page) {
  FieldValues fields;
  fields.title = page.first_meta("twitter:title");
  if (auto site = page.first_meta("twitter:site")) fields.container = clean(strip_at(*site));
  if (auto creator = page.first_meta("twitter:creator")) add_person(fields.authors, strip_at(*creator));
  return single(SourceKind::kTwitter, std::move(fields), page.fetched_at);
}

ExtractionResult extract_generic_meta(const ParsedPage& page) {
  FieldValues fields;
  for (const auto& a : page.meta_values("author")) add_person(fields.authors, a);
  fields.issued = first_date(page.meta_values("date"));
  return single(SourceKind::kMeta, std::move(fields), page.fetched_at);
}

ExtractionResult extract_schema_org(const ParsedPage& page) {
  const html::Document& dom = page.dom;
  auto is_article_scope = [&](html::NodeId id) {
    const html::Node& n = dom.node(id);
    if (!n.is_element() || !n.attr("itemscope")) return false;
    const std::string* type = n.attr("itemtype");
    if (!type) return false;
    std::string t(text::trim(*type));
    while (!t.empty() && t.back() == '/') t.pop_back();
    auto slash = t.rfind('/');
    std::string name = slash == std::string::npos ? t : t.substr(slash + 1);
    return text::ifind(t, "schema.org") != std::string::npos &&
           (name == "Article" || name == "BlogPosting" || name == "NewsArticle" ||
            name == "ScholarlyArticle" || name == "TechArticle");
  };
  auto owning_scope = [&](html::NodeId id) -> std::optional<html::NodeId> {
    html::NodeId cur = dom.node(id).parent;
    while (cur != 0) {
      if (dom.node(cur).attr("itemscope")) return cur;
      cur = dom.node(cur).parent;
    }
    return std::nullopt;
  };
  auto value_of = [&](html::NodeId id) {
    const html::Node& n = dom.node(id);
    if (const std::string* c = n.attr("content")) return *c;
    if (const std::string* d = n.attr("datetime")) return *d;
    return dom.text_content(id);
  };

  for (html::NodeId scope = 1; scope < dom.size(); ++scope) {
    if (!is_article_scope(scope)) continue;
    FieldValues fields;
    for (html::NodeId id = scope + 1; id < dom.size() && dom.is_descendant(id, scope); ++id) {
      const html::Node& n = dom.node(id);
      const std::string* prop = n.is_element() ? n.attr("itemprop") : nullptr;
      if (!prop || owning_scope(id) != scope) continue;
      if (!fields.title && (has_token(*prop, "headline") || has_token(*prop, "name"))) {
        fields.title = clean(value_of(id));
      } else if (!fields.issued && has_token(*prop, "datepublished")) {
        fields.issued = parse_date(value_of(id));
      }
    }
    if (!fields.empty()) return single(SourceKind::kSchemaOrg, std::move(fields), page.fetched_at);
  }
  return {};
}

ExtractionResult extract_html_all(const ParsedPage& page) {
  ExtractionResult all;
  all.append(extract_google_scholar(page));
  all.append(extract_eprints(page));
  all.append(extract_dublin_core(page));
  all.append(extract_coins(page));
  all.append(extract_ogp(page));
  all.append(extract_prism(page));
  all.append(extract_schema_org(page));
  all.append(extract_generic_meta(page));
  all.append(extract_twitter_card(page));
  all.append(extract_html_title(page));
  return all;
}

std::optional<std::string> extract_author_page_name(const ParsedPage& page) {
  if (auto t = page.first_meta("og:title")) return t;
  auto first = page.first_meta("profile:first_name");
  auto last = page.first_meta("profile:last_name");
  if (first && last) return *first + " " + *last;
  if (last) return last;
  auto titles = page.dom.elements("title");
  if (!titles.empty()) return clean(page.dom.text_content(titles.front()));
  return std::nullopt;
}

std::optional<std::string> discover_feed(const ParsedPage& page) {
  for (html::NodeId id : page.dom.elements("link")) {
    const html::Node& n = page.dom.node(id);
    const std::string* rel = n.attr("rel");
    const std::string* type = n.attr("type");
    const std::string* href = n.attr("href");
    if (!rel || !type || !href || !has_token(*rel, "alternate")) continue;
    std::string t = text::to_lower(text::trim(*type));
    if (t != "application/rss+xml" && t != "application/atom+xml") continue;
    if (auto uri = try_resolve_reference(page.final_uri, *href)) return uri;
  }
  return std::nullopt;
}

std::optional<MetadataFragment> infer_date_from_uri(std::string_view uri, int current_year,
                                                    Timestamp observed_at) {
  std::string path;
  try {
    path = split_uri(uri).path;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  auto segments = text::split(path, "/");
  auto number = [](const std::string& s, std::size_t min_len,
                   std::size_t max_len) -> std::optional<int> {
    if (s.size() < min_len || s.size() > max_len) return std::nullopt;
    int v = 0;
    for (char c : s) {
      if (!text::is_ascii_digit(c)) return std::nullopt;
      v = v * 10 + (c - '0');
    }
    return v;
  };
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    auto year = number(segments[i], 4, 4);
    if (!year || *year < 1990 || *year > current_year + 1) continue;
    auto month = number(segments[i + 1], 1, 2);
    if (!month || *month < 1 || *month > 12) continue;
    std::optional<int> day;
    if (i + 2 < segments.size()) {
      day = number(segments[i + 2], 1, 2);
      if (day && (*day < 1 || *day > days_in_month(*year, *month))) day.reset();
    }
    FieldValues fields;
    fields.issued = PartialDate::make(*year, *month, day, 1990);
    if (!fields.issued) continue;
    return make_fragment(SourceKind::kUriDate, std::move(fields), observed_at);
  }
  return std::nullopt;
}

std::optional<MetadataFragment> infer_date_from_uri(std::string_view uri) {
  auto now = std::chrono::floor<std::chrono::days>(system_now());
  int year = static_cast<int>(std::chrono::year_month_day(now).year());
  return infer_date_from_uri(uri, year);
}

}  // namespace greyharvest
