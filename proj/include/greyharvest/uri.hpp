#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace greyharvest {

/// Components of an absolute http(s) URI after normalization.
struct UriParts {
  std::string scheme;
  std::string userinfo;
  std::string host;
  std::string port;  // empty when default
  std::string path;
  std::optional<std::string> query;

  std::string str() const;
  /// scheme://host[:port], the politeness and robots.txt key.
  std::string origin() const;
  /// path plus ?query, the HTTP request target.
  std::string target() const;
};

/// Lowercases scheme and host, drops default ports and the fragment,
/// uppercases percent-escapes, removes dot-segments; the query is kept
/// byte-exact. Throws MalformedUri or UnsupportedScheme.
std::string normalize_uri(std::string_view raw);
std::optional<std::string> try_normalize_uri(std::string_view raw) noexcept;

UriParts split_uri(std::string_view raw);  // normalizes first

/// RFC 3986 reference resolution followed by normalization.
std::string resolve_reference(std::string_view base, std::string_view reference);
std::optional<std::string> try_resolve_reference(std::string_view base,
                                                 std::string_view reference) noexcept;

std::string uri_host(std::string_view uri);

/// Best-effort registrable domain: the last two labels, or three when the
/// second-level label is a well-known generic one under a two-letter ccTLD
/// (org.uk, co.jp, com.au, ...). IP literals are returned unchanged.
std::string registrable_domain(std::string_view host);

/// Decodes %XX escapes; returns nullopt on a malformed escape.
std::optional<std::string> percent_decode(std::string_view s, bool plus_as_space = false);

/// Percent-encodes every byte outside the RFC 3986 unreserved set.
std::string percent_encode(std::string_view s);

}  // namespace greyharvest
