#include "greyharvest/embedder.hpp"

#include "greyharvest/error.hpp"
#include "greyharvest/html.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest {

namespace {

void meta(std::string& out, const char* attr, const char* key, std::string_view value) {
  out += "<meta ";
  out += attr;
  out += "=\"";
  out += key;
  out += "\" content=\"" + html::escape_attribute(value) + "\" />\n";
}

std::string self_uri(const BibRecord& r) { return r.canonical_uri ? *r.canonical_uri : r.uri; }

}  // namespace

EmbedFormats EmbedFormats::parse(std::string_view list) {
  EmbedFormats f{false, false, false};
  for (const auto& raw : text::split(list, ",")) {
    std::string name = text::to_lower(text::trim(raw));
    if (name.empty()) continue;
    if (name == "scholar") f.scholar = true;
    else if (name == "ogp") f.ogp = true;
    else if (name == "coins") f.coins = true;
    else throw ConfigError("unknown embed format: " + name);
  }
  return f;
}

std::string coins_context_object(const BibRecord& r) {
  std::string out = "ctx_ver=Z39.88-2004&rft_val_fmt=" + percent_encode("info:ofi/fmt:kev:mtx:journal");
  // Always the page itself, so our own output never trips the mismatch block.
  out += "&rft_id=" + percent_encode(r.uri);
  if (r.title) out += "&rft.atitle=" + percent_encode(*r.title);
  if (r.container) out += "&rft.jtitle=" + percent_encode(*r.container);
  if (r.issued) out += "&rft.date=" + r.issued->iso();
  for (const auto& p : r.authors) out += "&rft.au=" + percent_encode(p.literal);
  return out;
}

Markup emit_markup(const BibRecord& record_in, const RecordOverride& override_fields,
                   EmbedFormats formats) {
  BibRecord r = record_in;
  if (override_fields.authors && !override_fields.authors->empty()) r.authors = *override_fields.authors;
  if (override_fields.container) r.container = override_fields.container;
  if (!r.title || text::trim(*r.title).empty()) throw MissingTitle("record has no title: " + r.uri);

  Markup m;
  if (formats.scholar) {
    meta(m.head_html, "name", "citation_title", *r.title);
    for (const auto& p : r.authors) meta(m.head_html, "name", "citation_author", p.literal);
    if (r.issued) meta(m.head_html, "name", "citation_publication_date", r.issued->iso());
    if (r.container) meta(m.head_html, "name", "citation_journal_title", *r.container);
  }
  if (formats.ogp) {
    meta(m.head_html, "property", "og:title", *r.title);
    if (r.container) meta(m.head_html, "property", "og:site_name", *r.container);
    meta(m.head_html, "property", "og:url", self_uri(r));
    if (r.issued) meta(m.head_html, "property", "article:published_time", r.issued->iso());
  }
  if (formats.coins) {
    m.body_html = "<span class=\"Z3988\" title=\"" + html::escape_attribute(coins_context_object(r)) +
                  "\"></span>\n";
  }
  return m;
}

}  // namespace greyharvest
