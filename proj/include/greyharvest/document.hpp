#pragma once

#include <atomic>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "greyharvest/model.hpp"

namespace greyharvest {

enum class MediaType : std::uint8_t { kHtml, kXmlFeed, kPdf, kOther };

std::string_view to_string(MediaType type);

/// Header multimap; names are stored lowercase.
using Headers = std::vector<std::pair<std::string, std::string>>;

const std::string* find_header(const Headers& headers, std::string_view name);

struct Redirect {
  int status = 0;
  std::string location;

  friend bool operator==(const Redirect&, const Redirect&) = default;
};

/// A fetched resource ready for extraction.
struct SourceDocument {
  std::string request_uri;
  std::string final_uri;
  std::vector<Redirect> redirect_chain;
  MediaType media_type = MediaType::kOther;
  std::string charset = "utf-8";
  std::string body;
  Headers headers;
  Timestamp fetched_at{};

  /// Body transcoded to UTF-8 according to charset.
  std::string text() const;
};

struct MediaInfo {
  MediaType type = MediaType::kOther;
  std::string charset = "utf-8";
};

/// Content-Type wins when recognized; otherwise the first 1024 bytes are
/// sniffed. Never fails: kOther is the fallback.
MediaInfo detect_media_type(const Headers& headers, std::string_view body_prefix);

/// Builds a document for bytes obtained without HTTP (offline mode, tests).
SourceDocument make_document(std::string uri, std::string body, Headers headers = {},
                             Timestamp fetched_at = Timestamp{});

/// Anything that can turn a URI into a document.
class DocumentSource {
 public:
  virtual ~DocumentSource() = default;
  virtual SourceDocument fetch(const std::string& uri) = 0;
};

/// In-memory source for offline use: URIs map to pre-built documents and
/// anything else fails with NetworkError.
class MapSource : public DocumentSource {
 public:
  void add(SourceDocument doc);
  void add(const std::string& uri, std::string body, Headers headers = {});
  SourceDocument fetch(const std::string& uri) override;
  std::size_t fetch_count() const { return fetch_count_; }

 private:
  std::map<std::string, SourceDocument> documents_;
  std::atomic<std::size_t> fetch_count_{0};
};

}  // namespace greyharvest
