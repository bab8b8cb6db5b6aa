#include "greyharvest/document.hpp"

#include <algorithm>

#include "greyharvest/error.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest {

std::string_view to_string(MediaType type) {
  switch (type) {
    case MediaType::kHtml: return "html";
    case MediaType::kXmlFeed: return "xml-feed";
    case MediaType::kPdf: return "pdf";
    case MediaType::kOther: return "other";
  }
  return "other";
}

const std::string* find_header(const Headers& headers, std::string_view name) {
  for (const auto& [key, value] : headers) {
    if (text::iequals(key, name)) return &value;
  }
  return nullptr;
}

std::string SourceDocument::text() const { return text::to_utf8(body, charset); }

namespace {

std::string content_type_param(std::string_view header, std::string_view param) {
  for (const auto& part : text::split(header, ";")) {
    std::string_view p = text::trim(part);
    auto eq = p.find('=');
    if (eq == std::string_view::npos) continue;
    if (text::iequals(text::trim(p.substr(0, eq)), param)) {
      std::string value(text::trim(p.substr(eq + 1)));
      if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'')) {
        value = value.substr(1, value.size() - 2);
      }
      return text::to_lower(value);
    }
  }
  return {};
}

std::string meta_charset(std::string_view prefix) {
  // <meta charset="x"> or <meta http-equiv="Content-Type" content="...; charset=x">
  std::size_t pos = 0;
  while ((pos = text::ifind(prefix, "charset", pos)) != std::string_view::npos) {
    pos += 7;
    std::size_t i = pos;
    while (i < prefix.size() && text::is_space(prefix[i])) ++i;
    if (i >= prefix.size() || prefix[i] != '=') continue;
    ++i;
    while (i < prefix.size() && (text::is_space(prefix[i]) || prefix[i] == '"' || prefix[i] == '\''))
      ++i;
    std::size_t start = i;
    while (i < prefix.size() && (text::is_ascii_alpha(prefix[i]) ||
                                 text::is_ascii_digit(prefix[i]) || prefix[i] == '-' ||
                                 prefix[i] == '_' || prefix[i] == ':' || prefix[i] == '.'))
      ++i;
    if (i > start) return text::to_lower(prefix.substr(start, i - start));
  }
  return {};
}

bool looks_like_feed(std::string_view prefix) {
  return text::ifind(prefix, "<rss") != std::string_view::npos ||
         text::ifind(prefix, "<feed") != std::string_view::npos ||
         text::ifind(prefix, "<rdf:rdf") != std::string_view::npos;
}

MediaType sniff(std::string_view prefix) {
  if (prefix.rfind("%PDF", 0) == 0) return MediaType::kPdf;
  std::string_view body = prefix;
  // Tolerate a UTF-8 BOM and leading whitespace before the markup.
  if (body.size() >= 3 && body.substr(0, 3) == "\xEF\xBB\xBF") body.remove_prefix(3);
  std::size_t lead = 0;
  while (lead < body.size() && text::is_space(body[lead])) ++lead;
  body.remove_prefix(lead);
  if (text::istarts_with(body, "<?xml") && looks_like_feed(body)) return MediaType::kXmlFeed;
  if (text::ifind(prefix, "<html") != std::string_view::npos ||
      text::ifind(prefix, "<!doctype html") != std::string_view::npos) {
    return MediaType::kHtml;
  }
  if (text::istarts_with(body, "<rss") || text::istarts_with(body, "<feed")) {
    return MediaType::kXmlFeed;
  }
  return MediaType::kOther;
}

}  // namespace

MediaInfo detect_media_type(const Headers& headers, std::string_view body_prefix) {
  std::string_view prefix = body_prefix.substr(0, std::min<std::size_t>(body_prefix.size(), 1024));
  MediaInfo info;
  std::string header_charset;
  bool decided = false;
  if (const std::string* ct = find_header(headers, "content-type")) {
    std::string mime = text::to_lower(text::trim(ct->substr(0, ct->find(';'))));
    header_charset = content_type_param(*ct, "charset");
    if (mime == "text/html" || mime == "application/xhtml+xml") {
      info.type = MediaType::kHtml;
      decided = true;
    } else if (mime == "application/pdf" || mime == "application/x-pdf") {
      info.type = MediaType::kPdf;
      decided = true;
    } else if (mime == "application/rss+xml" || mime == "application/atom+xml") {
      info.type = MediaType::kXmlFeed;
      decided = true;
    }
  }
  if (!decided) info.type = sniff(prefix);
  if (!header_charset.empty()) {
    info.charset = header_charset;
  } else if (info.type == MediaType::kHtml) {
    std::string meta = meta_charset(prefix);
    if (!meta.empty()) info.charset = meta;
  }
  return info;
}

SourceDocument make_document(std::string uri, std::string body, Headers headers,
                             Timestamp fetched_at) {
  SourceDocument doc;
  doc.request_uri = normalize_uri(uri);
  doc.final_uri = doc.request_uri;
  MediaInfo media = detect_media_type(headers, body);
  doc.media_type = media.type;
  doc.charset = media.charset;
  doc.body = std::move(body);
  doc.headers = std::move(headers);
  doc.fetched_at = fetched_at;
  return doc;
}

void MapSource::add(SourceDocument doc) {
  std::string key = doc.request_uri;
  documents_[key] = std::move(doc);
}

void MapSource::add(const std::string& uri, std::string body, Headers headers) {
  add(make_document(uri, std::move(body), std::move(headers)));
}

SourceDocument MapSource::fetch(const std::string& uri) {
  ++fetch_count_;
  auto normalized = try_normalize_uri(uri);
  auto it = normalized ? documents_.find(*normalized) : documents_.end();
  if (it == documents_.end()) throw NetworkError("offline: no document for " + uri);
  return it->second;
}

}  // namespace greyharvest
