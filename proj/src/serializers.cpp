#include "greyharvest/serializers.hpp"

#include <array>
#include <cstdio>

#include "greyharvest/hash.hpp"
#include "greyharvest/json_codec.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest {

namespace {

constexpr std::array<const char*, 12> kMonths = {"jan", "feb", "mar", "apr", "may", "jun",
                                                 "jul", "aug", "sep", "oct", "nov", "dec"};

const std::string& link_of(const BibRecord& r) { return r.canonical_uri ? *r.canonical_uri : r.uri; }

// Line-oriented formats cannot carry raw line breaks inside a value.
std::string one_line(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(c == '\r' || c == '\n' || c == '\t' ? ' ' : c);
  return out;
}

std::string two_digits(int v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

std::string url_escape_bibtex(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '{' || c == '}' || c == '%') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string turtle_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[12];
          std::snprintf(buf, sizeof buf, "\\u%04X", static_cast<unsigned>(c));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
  return out;
}

std::string turtle_iri(std::string_view s) {
  std::string out = "<";
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
        c == '^' || c == '`' || c == '\\') {
      char buf[12];
      std::snprintf(buf, sizeof buf, "\\u%04X", static_cast<unsigned>(u));
      out += buf;
    } else {
      out.push_back(c);
    }
  }
  out.push_back('>');
  return out;
}

std::string wiki_escape(std::string_view s) {
  std::string out;
  for (char c : one_line(s)) {
    switch (c) {
      case '|': out += "{{!}}"; break;
      case '{': out += "&#123;"; break;
      case '}': out += "&#125;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string date_ymd(Timestamp t) {
  std::string s = format_timestamp(t);
  return s.substr(0, 10);
}

}  // namespace

std::optional<Format> format_from_string(std::string_view name) {
  std::string n = text::to_lower(name);
  if (n == "json" || n == "citeproc") return Format::kCiteproc;
  if (n == "bibtex" || n == "bib") return Format::kBibtex;
  if (n == "ris") return Format::kRis;
  if (n == "rdf" || n == "turtle" || n == "ttl") return Format::kTurtle;
  if (n == "wiki") return Format::kWiki;
  return std::nullopt;
}

std::string_view content_type(Format format) {
  switch (format) {
    case Format::kCiteproc: return "application/json";
    case Format::kBibtex: return "text/plain; charset=utf-8";
    case Format::kRis: return "application/x-research-info-systems; charset=utf-8";
    case Format::kTurtle: return "text/turtle; charset=utf-8";
    case Format::kWiki: return "text/plain; charset=utf-8";
  }
  return "text/plain";
}

std::string to_citeproc(const BibRecord& r) {
  json::Json j;
  j["id"] = r.uri;
  j["type"] = "webpage";
  if (r.title) j["title"] = *r.title;
  if (!r.authors.empty()) {
    json::Json authors = json::Json::array();
    for (const auto& p : r.authors) {
      json::Json a;
      if (p.family) {
        a["family"] = *p.family;
        if (p.given) a["given"] = *p.given;
      } else {
        a["literal"] = p.literal;
      }
      authors.push_back(std::move(a));
    }
    j["author"] = std::move(authors);
  }
  if (r.container) j["container-title"] = *r.container;
  if (r.issued) {
    json::Json parts = json::Json::array({r.issued->year});
    if (r.issued->month) parts.push_back(*r.issued->month);
    if (r.issued->day) parts.push_back(*r.issued->day);
    j["issued"] = {{"date-parts", json::Json::array({parts})}};
  }
  j["URL"] = link_of(r);
  return j.dump();
}

std::string bibtex_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\textbackslash{}"; break;
      case '{': out += "\\{"; break;
      case '}': out += "\\}"; break;
      case '%': out += "\\%"; break;
      case '&': out += "\\&"; break;
      case '\r':
      case '\n': out.push_back(' '); break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string bibtex_key(std::string_view uri) {
  std::string host;
  try {
    host = uri_host(uri);
  } catch (const std::exception&) {
    host = "uri";
  }
  for (char& c : host) {
    if (!(text::is_ascii_alpha(c) || text::is_ascii_digit(c) || c == '.' || c == '-')) c = '_';
  }
  return host + "_" + sha256_hex(uri).substr(0, 8);
}

std::string to_bibtex(const BibRecord& r) {
  std::string out = "@misc{" + bibtex_key(r.uri) + ",\n";
  auto field = [&](const char* name, const std::string& braced) {
    out += "  ";
    out += name;
    out += " = {" + braced + "},\n";
  };
  if (r.title) field("title", bibtex_escape(*r.title));
  if (!r.authors.empty()) {
    std::vector<std::string> names;
    for (const auto& p : r.authors) names.push_back(bibtex_escape(p.literal));
    field("author", text::join(names, " and "));
  }
  if (r.issued) {
    field("year", std::to_string(r.issued->year));
    if (r.issued->month) {
      out += "  month = " + std::string(kMonths[static_cast<std::size_t>(*r.issued->month - 1)]) + ",\n";
    }
  }
  field("howpublished", "\\url{" + url_escape_bibtex(link_of(r)) + "}");
  if (!r.archives.empty()) {
    std::vector<std::string> uris;
    for (const auto& a : r.archives) uris.push_back(bibtex_escape(a.snapshot_uri));
    field("note", "Archived at: " + text::join(uris, ", "));
  }
  out += "}\n";
  return out;
}

std::string to_ris(const BibRecord& r) {
  std::string out;
  auto line = [&](const char* tag, std::string_view value) {
    out += tag;
    out += "  - ";
    out += one_line(value);
    out += "\r\n";
  };
  line("TY", "ELEC");
  if (r.title) line("TI", *r.title);
  for (const auto& p : r.authors) {
    line("AU", p.family ? (p.given ? *p.family + ", " + *p.given : *p.family) : p.literal);
  }
  if (r.issued) {
    std::string py = std::to_string(r.issued->year) + "/";
    py += r.issued->month ? two_digits(*r.issued->month) : "";
    py += "/";
    py += r.issued->day ? two_digits(*r.issued->day) : "";
    py += "/";
    line("PY", py);
  }
  if (r.container) line("T2", *r.container);
  line("UR", link_of(r));
  out += "ER  - \r\n";
  return out;
}

std::string to_dc_rdf(const BibRecord& r) {
  std::string out = "@prefix dc: <http://purl.org/dc/elements/1.1/> .\n\n";
  out += turtle_iri(r.uri) + "\n";
  std::vector<std::string> props;
  props.push_back("dc:identifier " + turtle_string(r.uri));
  if (r.title) props.push_back("dc:title " + turtle_string(*r.title));
  for (const auto& p : r.authors) props.push_back("dc:creator " + turtle_string(p.literal));
  if (r.issued) props.push_back("dc:date " + turtle_string(r.issued->iso()));
  if (r.container) props.push_back("dc:publisher " + turtle_string(*r.container));
  if (r.canonical_uri && *r.canonical_uri != r.uri) {
    props.push_back("dc:relation " + turtle_iri(*r.canonical_uri));
  }
  for (std::size_t i = 0; i < props.size(); ++i) {
    out += "    " + props[i] + (i + 1 == props.size() ? " .\n" : " ;\n");
  }
  return out;
}

std::string to_wiki_cite(const BibRecord& r) {
  std::string out = "{{cite web |url=" + wiki_escape(link_of(r));
  if (r.title) out += " |title=" + wiki_escape(*r.title);
  for (std::size_t i = 0; i < r.authors.size(); ++i) {
    out += i == 0 ? " |author=" : " |author" + std::to_string(i + 1) + "=";
    out += wiki_escape(r.authors[i].literal);
  }
  if (r.issued) out += " |date=" + r.issued->iso();
  if (r.container) out += " |website=" + wiki_escape(*r.container);
  out += " |access-date=" + date_ymd(r.retrieved_at) + "}}";
  return out;
}

std::string serialize(const BibRecord& record, Format format) {
  switch (format) {
    case Format::kCiteproc: return to_citeproc(record);
    case Format::kBibtex: return to_bibtex(record);
    case Format::kRis: return to_ris(record);
    case Format::kTurtle: return to_dc_rdf(record);
    case Format::kWiki: return to_wiki_cite(record);
  }
  return {};
}

}  // namespace greyharvest
