#include "greyharvest/site_rules.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "greyharvest/dates.hpp"
#include "greyharvest/error.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest {

namespace {

constexpr std::size_t kMaxRegexInput = 4096;

bool glob(std::string_view p, std::string_view s) {
  std::size_t pi = 0, si = 0, star = std::string_view::npos, mark = 0;
  while (si < s.size()) {
    if (pi < p.size() && (p[pi] == '?' || p[pi] == s[si])) {
      ++pi;
      ++si;
    } else if (pi < p.size() && p[pi] == '*') {
      star = pi++;
      mark = si;
    } else if (star != std::string_view::npos) {
      pi = star + 1;
      si = ++mark;
    } else {
      return false;
    }
  }
  while (pi < p.size() && p[pi] == '*') ++pi;
  return pi == p.size();
}

std::optional<std::string> optional_string(const json::Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw ConfigError(std::string("rule key must be a string: ") + key);
  return j.at(key).get<std::string>();
}

FieldSelector parse_selector(const json::Json& j) {
  if (!j.is_object()) throw ConfigError("selector must be an object");
  auto path = optional_string(j, "path");
  if (!path) throw ConfigError("selector needs a path");
  FieldSelector s;
  s.path = html::Selector::parse(*path);
  s.attr = optional_string(j, "attr");
  if (s.attr) *s.attr = text::to_lower(*s.attr);
  s.pattern = optional_string(j, "regex");
  if (s.pattern) {
    try {
      s.regex.emplace(*s.pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw ConfigError("bad selector regex '" + *s.pattern + "': " + e.what());
    }
  }
  s.split = optional_string(j, "split");
  if (s.split && s.split->empty()) throw ConfigError("selector split must be non-empty");
  auto scope = optional_string(j, "scope").value_or("document");
  if (scope == "entry") s.scope = FieldSelector::Scope::kEntry;
  else if (scope != "document") throw ConfigError("selector scope must be document or entry");
  return s;
}

std::vector<std::string> selector_values(const html::Document& dom, const FieldSelector& sel,
                                         html::NodeId scope) {
  std::vector<std::string> out;
  for (html::NodeId id : dom.select(sel.path, scope)) {
    std::string raw;
    if (sel.attr) {
      const std::string* v = dom.node(id).attr(*sel.attr);
      if (!v) continue;
      raw = *v;
    } else {
      raw = dom.text_content(id);
    }
    if (sel.regex) {
      if (raw.size() > kMaxRegexInput) raw.resize(kMaxRegexInput);
      std::smatch m;
      if (!std::regex_search(raw, m, *sel.regex)) continue;
      raw = m.size() > 1 ? m[1].str() : m[0].str();
    }
    std::string value = text::collapse_whitespace(raw);
    if (!value.empty()) out.push_back(std::move(value));
  }
  return out;
}

// Evaluates a rule; entry == nullopt skips entry-scoped selectors.
FieldValues evaluate(const SiteRule& rule, const ParsedPage& page, std::optional<html::NodeId> entry,
                     std::string_view base_uri) {
  FieldValues fields;
  for (const auto& [field, sel] : rule.selectors) {
    html::NodeId scope = html::Document::root();
    if (sel.scope == FieldSelector::Scope::kEntry) {
      if (!entry) continue;
      scope = *entry;
    }
    auto values = selector_values(page.dom, sel, scope);
    switch (field) {
      case Field::kTitle:
        if (!fields.title && !values.empty()) fields.title = values.front();
        break;
      case Field::kContainer:
        if (!fields.container && !values.empty()) fields.container = values.front();
        break;
      case Field::kAuthors:
        if (!fields.authors.empty()) break;
        for (const auto& v : values) {
          auto parts = sel.split ? text::split(v, *sel.split) : std::vector<std::string>{v};
          for (const auto& p : parts) {
            std::string c = text::collapse_whitespace(p);
            if (!c.empty()) fields.authors.push_back(Person::from_literal(c));
          }
        }
        break;
      case Field::kIssued:
        for (const auto& v : values) {
          if (fields.issued) break;
          fields.issued = parse_date(v);
        }
        break;
      case Field::kCanonicalUri:
        for (const auto& v : values) {
          if (fields.canonical_uri) break;
          fields.canonical_uri = try_resolve_reference(base_uri, v);
        }
        break;
    }
  }
  return fields;
}

std::string host_of(std::string_view uri) {
  try {
    return uri_host(uri);
  } catch (const std::exception&) {
    return {};
  }
}

}  // namespace

bool host_glob_match(std::string_view pattern, std::string_view host) {
  std::string p = text::to_lower(pattern);
  std::string h = text::to_lower(host);
  if (glob(p, h)) return true;
  return p.rfind("*.", 0) == 0 && h == p.substr(2);
}

bool SiteRule::matches_host(std::string_view host) const {
  return host_glob_match(host_pattern, host);
}

SiteRule SiteRule::from_json(const json::Json& j) {
  if (!j.is_object()) throw ConfigError("site rule must be a JSON object");
  SiteRule rule;
  rule.id = optional_string(j, "id").value_or("");
  if (rule.id.empty()) throw ConfigError("site rule needs an id");
  rule.host_pattern = optional_string(j, "host_pattern").value_or("");
  if (rule.host_pattern.empty()) throw ConfigError("site rule " + rule.id + " needs a host_pattern");
  rule.source = source_kind_from_string(rule.id).value_or(SourceKind::kSiteRule);
  rule.notes = optional_string(j, "notes").value_or("");
  rule.entry_scope = optional_string(j, "entry_scope");
  if (rule.entry_scope) *rule.entry_scope = text::to_lower(*rule.entry_scope);
  if (j.contains("selectors")) {
    const auto& selectors = j.at("selectors");
    if (!selectors.is_object()) throw ConfigError("selectors must be an object");
    for (const auto& [name, spec] : selectors.items()) {
      auto field = field_from_string(name);
      if (!field) throw ConfigError("site rule " + rule.id + ": unknown field " + name);
      if (!grants(rule.source, *field)) {
        throw ConfigError("site rule " + rule.id + " may not select " + name);
      }
      rule.selectors.emplace_back(*field, parse_selector(spec));
    }
  }
  return rule;
}

std::vector<SiteRule> load_site_rules(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (ec) throw ConfigError("cannot read rules directory " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<SiteRule> rules;
  for (const auto& file : files) {
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    json::Json j = json::Json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw ConfigError("invalid JSON in rule file " + file.string());
    try {
      rules.push_back(SiteRule::from_json(j));
    } catch (const ConfigError& e) {
      throw ConfigError(file.filename().string() + ": " + e.what());
    }
  }
  return rules;
}

ExtractionResult apply_site_rules(const ParsedPage& page, const std::vector<SiteRule>& rules) {
  ExtractionResult r;
  std::string host = host_of(page.final_uri);
  if (host.empty()) return r;
  for (const auto& rule : rules) {
    if (!rule.matches_host(host)) continue;
    FieldValues fields = evaluate(rule, page, std::nullopt, page.final_uri);
    if (auto f = make_fragment(rule.source, std::move(fields), page.fetched_at)) {
      r.fragments.push_back(std::move(*f));
    }
  }
  return r;
}

bool has_link_context_rule(std::string_view host, const std::vector<SiteRule>& rules) {
  return std::any_of(rules.begin(), rules.end(), [&](const SiteRule& rule) {
    return rule.entry_scope && rule.matches_host(host);
  });
}

ExtractionResult extract_link_context(std::string_view pdf_uri, const ParsedPage& index,
                                      const std::vector<SiteRule>& rules) {
  auto target = try_normalize_uri(pdf_uri);
  std::optional<html::NodeId> anchor;
  if (target) {
    for (html::NodeId id : index.dom.elements("a")) {
      const std::string* href = index.dom.node(id).attr("href");
      if (href && try_resolve_reference(index.final_uri, *href) == target) {
        anchor = id;
        break;
      }
    }
  }
  if (!anchor) throw LinkNotFound("no link to " + std::string(pdf_uri) + " in " + index.final_uri);

  ExtractionResult r;
  std::string host = host_of(index.final_uri);
  for (const auto& rule : rules) {
    if (!rule.entry_scope || !rule.matches_host(host)) continue;
    html::NodeId entry = index.dom.closest(*anchor, *rule.entry_scope)
                             .value_or(index.dom.node(*anchor).parent);
    FieldValues fields = evaluate(rule, index, entry, index.final_uri);
    if (auto f = make_fragment(rule.source, std::move(fields), index.fetched_at)) {
      r.fragments.push_back(std::move(*f));
    }
    break;
  }
  return r;
}

}  // namespace greyharvest
