#include "greyharvest/uri.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <vector>

#include "greyharvest/error.hpp"
#include "greyharvest/text.hpp"

namespace greyharvest {

namespace {

bool is_hex(char c) {
  return text::is_ascii_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return c - 'A' + 10;
}

char upper_hex(char c) { return (c >= 'a' && c <= 'f') ? static_cast<char>(c - 32) : c; }

bool is_unreserved(unsigned char c) {
  return text::is_ascii_alpha(static_cast<char>(c)) || text::is_ascii_digit(static_cast<char>(c)) ||
         c == '-' || c == '.' || c == '_' || c == '~';
}

// Characters that may appear literally in a normalized path.
bool is_path_char(unsigned char c) {
  if (is_unreserved(c)) return true;
  switch (c) {
    case '/': case ':': case '@': case '!': case '$': case '&': case '\'': case '(':
    case ')': case '*': case '+': case ',': case ';': case '=':
      return true;
    default:
      return false;
  }
}

void append_escape(std::string& out, unsigned char c) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  out.push_back('%');
  out.push_back(kHex[c >> 4]);
  out.push_back(kHex[c & 0xF]);
}

std::string normalize_path_encoding(std::string_view path) {
  std::string out;
  out.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    auto c = static_cast<unsigned char>(path[i]);
    if (c == '%') {
      if (i + 2 < path.size() && is_hex(path[i + 1]) && is_hex(path[i + 2])) {
        out.push_back('%');
        out.push_back(upper_hex(path[i + 1]));
        out.push_back(upper_hex(path[i + 2]));
        i += 2;
      } else {
        out.append("%25");
      }
    } else if (is_path_char(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      append_escape(out, c);
    }
  }
  return out;
}

std::string remove_dot_segments(std::string_view input) {
  std::string in(input);
  std::string out;
  while (!in.empty()) {
    if (in.rfind("../", 0) == 0) {
      in.erase(0, 3);
    } else if (in.rfind("./", 0) == 0) {
      in.erase(0, 2);
    } else if (in.rfind("/./", 0) == 0) {
      in.replace(0, 3, "/");
    } else if (in == "/.") {
      in = "/";
    } else if (in.rfind("/../", 0) == 0 || in == "/..") {
      in = in.size() == 3 ? std::string("/") : in.substr(3);
      auto slash = out.rfind('/');
      out.erase(slash == std::string::npos ? 0 : slash);
    } else if (in == "." || in == "..") {
      in.clear();
    } else {
      std::size_t start = in[0] == '/' ? 1 : 0;
      std::size_t next = in.find('/', start);
      if (next == std::string::npos) next = in.size();
      out.append(in, 0, next);
      in.erase(0, next);
    }
  }
  return out;
}

bool valid_host_char(unsigned char c) {
  return is_unreserved(c) || c == '%' || c >= 0x80 || c == '!' || c == '$' || c == '&' ||
         c == '\'' || c == '(' || c == ')' || c == '*' || c == '+' || c == ',' || c == ';' ||
         c == '=';
}

struct RawReference {
  std::optional<std::string> scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
};

std::optional<std::size_t> scheme_end(std::string_view s) {
  if (s.empty() || !text::is_ascii_alpha(s[0])) return std::nullopt;
  for (std::size_t i = 1; i < s.size(); ++i) {
    char c = s[i];
    if (c == ':') return i;
    if (!(text::is_ascii_alpha(c) || text::is_ascii_digit(c) || c == '+' || c == '-' || c == '.'))
      return std::nullopt;
  }
  return std::nullopt;
}

RawReference split_reference(std::string_view s) {
  RawReference r;
  if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
  if (auto end = scheme_end(s)) {
    r.scheme = std::string(s.substr(0, *end));
    s.remove_prefix(*end + 1);
  }
  if (s.rfind("//", 0) == 0) {
    s.remove_prefix(2);
    std::size_t end = s.find_first_of("/?");
    r.authority = std::string(s.substr(0, end));
    s = end == std::string_view::npos ? std::string_view{} : s.substr(end);
  }
  if (auto q = s.find('?'); q != std::string_view::npos) {
    r.query = std::string(s.substr(q + 1));
    s = s.substr(0, q);
  }
  r.path = std::string(s);
  return r;
}

UriParts build_parts(const RawReference& raw) {
  if (!raw.scheme) throw MalformedUri("missing scheme");
  UriParts parts;
  parts.scheme = text::to_lower(*raw.scheme);
  if (parts.scheme != "http" && parts.scheme != "https") {
    throw UnsupportedScheme("unsupported scheme: " + parts.scheme);
  }
  if (!raw.authority) throw MalformedUri("missing authority");
  std::string_view authority = *raw.authority;
  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    parts.userinfo = std::string(authority.substr(0, at));
    authority.remove_prefix(at + 1);
  }
  std::string_view host = authority;
  std::string_view port;
  if (!authority.empty() && authority[0] == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) throw MalformedUri("unterminated IPv6 literal");
    host = authority.substr(0, close + 1);
    std::string_view rest = authority.substr(close + 1);
    if (!rest.empty()) {
      if (rest[0] != ':') throw MalformedUri("garbage after IPv6 literal");
      port = rest.substr(1);
    }
  } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  }
  if (host.empty()) throw MalformedUri("empty host");
  if (host[0] != '[') {
    for (char c : host) {
      if (!valid_host_char(static_cast<unsigned char>(c))) throw MalformedUri("invalid host");
    }
  }
  parts.host = text::to_lower(host);
  if (!port.empty()) {
    if (port.size() > 5 || !std::all_of(port.begin(), port.end(), text::is_ascii_digit)) {
      throw MalformedUri("invalid port");
    }
    long value = std::strtol(std::string(port).c_str(), nullptr, 10);
    if (value > 65535) throw MalformedUri("invalid port");
    bool is_default = (parts.scheme == "http" && value == 80) ||
                      (parts.scheme == "https" && value == 443);
    if (!is_default) parts.port = std::to_string(value);
  }
  std::string path = raw.path.empty() ? std::string("/") : raw.path;
  if (path[0] != '/') path.insert(0, "/");
  parts.path = remove_dot_segments(normalize_path_encoding(path));
  if (parts.path.empty()) parts.path = "/";
  parts.query = raw.query;
  return parts;
}

}  // namespace

std::string UriParts::origin() const {
  std::string out = scheme + "://" + host;
  if (!port.empty()) out += ":" + port;
  return out;
}

std::string UriParts::target() const { return query ? path + "?" + *query : path; }

std::string UriParts::str() const {
  std::string out = scheme + "://";
  if (!userinfo.empty()) out += userinfo + "@";
  out += host;
  if (!port.empty()) out += ":" + port;
  out += target();
  return out;
}

UriParts split_uri(std::string_view raw) {
  std::string_view trimmed = text::trim(raw);
  if (trimmed.empty()) throw MalformedUri("empty uri");
  for (char c : trimmed) {
    if (static_cast<unsigned char>(c) < 0x20) throw MalformedUri("control character in uri");
  }
  return build_parts(split_reference(trimmed));
}

std::string normalize_uri(std::string_view raw) { return split_uri(raw).str(); }

std::optional<std::string> try_normalize_uri(std::string_view raw) noexcept {
  try {
    return normalize_uri(raw);
  } catch (...) {
    return std::nullopt;
  }
}

std::string resolve_reference(std::string_view base, std::string_view reference) {
  std::string_view ref = text::trim(reference);
  RawReference r = split_reference(ref);
  if (r.scheme) return normalize_uri(ref);
  UriParts b = split_uri(base);
  RawReference target;
  target.scheme = b.scheme;
  if (r.authority) {
    target.authority = r.authority;
    target.path = r.path;
    target.query = r.query;
    return build_parts(target).str();
  }
  std::string authority = b.userinfo.empty() ? b.host : b.userinfo + "@" + b.host;
  if (!b.port.empty()) authority += ":" + b.port;
  target.authority = authority;
  if (r.path.empty()) {
    target.path = b.path;
    target.query = r.query ? r.query : b.query;
  } else {
    if (r.path[0] == '/') {
      target.path = r.path;
    } else {
      auto slash = b.path.rfind('/');
      target.path = b.path.substr(0, slash + 1) + r.path;
    }
    target.query = r.query;
  }
  return build_parts(target).str();
}

std::optional<std::string> try_resolve_reference(std::string_view base,
                                                 std::string_view reference) noexcept {
  try {
    return resolve_reference(base, reference);
  } catch (...) {
    return std::nullopt;
  }
}

std::string uri_host(std::string_view uri) { return split_uri(uri).host; }

std::string registrable_domain(std::string_view host_in) {
  std::string host = text::to_lower(host_in);
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty() || host[0] == '[') return host;
  if (std::all_of(host.begin(), host.end(),
                  [](char c) { return text::is_ascii_digit(c) || c == '.'; })) {
    return host;
  }
  std::vector<std::string> labels = text::split(host, ".");
  if (labels.size() <= 2) return host;
  static constexpr std::array<std::string_view, 14> kSecondLevel = {
      "co", "ac", "org", "gov", "net", "edu", "com", "ltd", "plc", "sch", "nhs", "mil", "gen", "nic"};
  const std::string& tld = labels.back();
  const std::string& sld = labels[labels.size() - 2];
  bool three = tld.size() == 2 &&
               std::find(kSecondLevel.begin(), kSecondLevel.end(), sld) != kSecondLevel.end();
  std::size_t keep = three ? 3 : 2;
  std::vector<std::string> tail(labels.end() - static_cast<std::ptrdiff_t>(keep), labels.end());
  return text::join(tail, ".");
}

std::optional<std::string> percent_decode(std::string_view s, bool plus_as_space) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '%') {
      if (i + 2 >= s.size()) return std::nullopt;
      if (!is_hex(s[i + 1]) || !is_hex(s[i + 2])) return std::nullopt;
      out.push_back(static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2])));
      i += 2;
    } else if (c == '+' && plus_as_space) {
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string percent_encode(std::string_view s) {
  std::string out;
  out.reserve(s.size() * 3);
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (is_unreserved(c)) {
      out.push_back(ch);
    } else {
      append_escape(out, c);
    }
  }
  return out;
}

}  // namespace greyharvest
