// RSS 2.0, RSS 1.0 (RDF) and Atom entry metadata via expat.

#include <expat.h>

#include <memory>

#include "greyharvest/dates.hpp"
#include "greyharvest/error.hpp"
#include "greyharvest/extractors.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest {

namespace {

constexpr std::string_view kAtomNs = "http://www.w3.org/2005/Atom";
constexpr std::string_view kDcNs = "http://purl.org/dc/elements/1.1/";
constexpr std::string_view kRss1Ns = "http://purl.org/rss/1.0/";
constexpr std::string_view kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
constexpr std::size_t kMaxDepth = 256;

struct QName {
  std::string ns;
  std::string local;
};

QName split_name(const XML_Char* raw) {
  std::string_view s(raw);
  auto sep = s.find('\x1f');
  if (sep == std::string_view::npos) return {"", std::string(s)};
  return {std::string(s.substr(0, sep)), std::string(s.substr(sep + 1))};
}

enum class FeedKind { kUnknown, kRss, kAtom };

struct RawEntry {
  std::string link;
  std::string guid;
  bool guid_permalink = true;
  std::string atom_alternate;
  std::string title;
  std::vector<std::string> authors;
  std::string date;          // pubDate / published / dc:date
  std::string updated;       // Atom fallback
};

class FeedParser {
 public:
  explicit FeedParser(std::string base) : base_(std::move(base)) {}

  FeedKind kind = FeedKind::kUnknown;
  std::string feed_title;
  std::vector<RawEntry> entries;

  static void XMLCALL on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
    static_cast<FeedParser*>(self)->start(split_name(name), attrs);
  }
  static void XMLCALL on_end(void* self, const XML_Char*) { static_cast<FeedParser*>(self)->end(); }
  static void XMLCALL on_text(void* self, const XML_Char* s, int len) {
    auto* p = static_cast<FeedParser*>(self);
    if (p->text_.size() < (1u << 20)) p->text_.append(s, static_cast<std::size_t>(len));
  }

  bool too_deep() const { return stack_.size() > kMaxDepth; }

 private:
  void start(QName name, const XML_Char** attrs) {
    text_.clear();
    if (stack_.empty()) {
      if (name.ns.empty() && name.local == "rss") kind = FeedKind::kRss;
      else if (name.ns == kRdfNs && name.local == "RDF") kind = FeedKind::kRss;
      else if (name.ns == kAtomNs && name.local == "feed") kind = FeedKind::kAtom;
    }
    bool is_entry = (kind == FeedKind::kRss && name.local == "item" &&
                     (name.ns.empty() || name.ns == kRss1Ns)) ||
                    (kind == FeedKind::kAtom && name.ns == kAtomNs && name.local == "entry");
    if (is_entry && !current_) {
      current_ = std::make_unique<RawEntry>();
      entry_depth_ = stack_.size();
    }
    if (current_ && kind == FeedKind::kAtom && name.ns == kAtomNs && name.local == "link" &&
        stack_.size() == entry_depth_ + 1) {
      std::string rel = "alternate", href;
      for (std::size_t i = 0; attrs[i]; i += 2) {
        std::string_view key(attrs[i]);
        if (key == "rel") rel = attrs[i + 1];
        if (key == "href") href = attrs[i + 1];
      }
      if (rel == "alternate" && current_->atom_alternate.empty()) current_->atom_alternate = href;
    }
    if (current_ && kind == FeedKind::kRss && name.local == "guid" && name.ns.empty()) {
      for (std::size_t i = 0; attrs[i]; i += 2) {
        if (std::string_view(attrs[i]) == "isPermaLink") {
          current_->guid_permalink = text::iequals(text::trim(attrs[i + 1]), "true");
        }
      }
    }
    stack_.push_back(std::move(name));
  }

  void end() {
    if (stack_.empty()) return;
    QName name = std::move(stack_.back());
    stack_.pop_back();
    std::string value = text::collapse_whitespace(text_);
    text_.clear();
    if (current_) {
      std::size_t rel_depth = stack_.size() - entry_depth_;
      if (rel_depth == 0) {
        entries.push_back(std::move(*current_));
        current_.reset();
        return;
      }
      RawEntry& e = *current_;
      if (kind == FeedKind::kRss && rel_depth == 1) {
        if (name.local == "title" && (name.ns.empty() || name.ns == kRss1Ns)) e.title = value;
        else if (name.local == "link" && (name.ns.empty() || name.ns == kRss1Ns)) e.link = value;
        else if (name.local == "guid" && name.ns.empty()) e.guid = value;
        else if (name.local == "pubDate" && name.ns.empty() && e.date.empty()) e.date = value;
        else if (name.ns == kDcNs && name.local == "date" && e.date.empty()) e.date = value;
        else if (name.ns == kDcNs && name.local == "creator" && !value.empty()) e.authors.push_back(value);
        else if (name.ns.empty() && name.local == "author" && !value.empty()) rss_author(e, value);
      } else if (kind == FeedKind::kAtom && name.ns == kAtomNs) {
        if (rel_depth == 1 && name.local == "title") e.title = value;
        else if (rel_depth == 1 && name.local == "published") e.date = value;
        else if (rel_depth == 1 && name.local == "updated") e.updated = value;
        else if (rel_depth == 2 && name.local == "name" && stack_.back().local == "author" &&
                 !value.empty()) {
          e.authors.push_back(value);
        }
      } else if (kind == FeedKind::kAtom && name.ns == kDcNs && rel_depth == 1 &&
                 name.local == "creator" && !value.empty()) {
        e.authors.push_back(value);
      }
      return;
    }
    // Feed-level title: rss/channel/title, rdf:RDF/channel/title, feed/title.
    bool channel_title = kind == FeedKind::kRss && stack_.size() == 2 && name.local == "title" &&
                         stack_.back().local == "channel";
    bool atom_title = kind == FeedKind::kAtom && stack_.size() == 1 && name.ns == kAtomNs &&
                      name.local == "title";
    if ((channel_title || atom_title) && feed_title.empty()) feed_title = value;
  }

  // RSS <author> is an email address, often "addr (Real Name)".
  static void rss_author(RawEntry& e, const std::string& value) {
    auto open = value.find('(');
    auto close = value.rfind(')');
    if (open != std::string::npos && close != std::string::npos && close > open) {
      std::string name = text::collapse_whitespace(value.substr(open + 1, close - open - 1));
      if (!name.empty()) e.authors.push_back(name);
    } else if (value.find('@') == std::string::npos) {
      e.authors.push_back(value);
    }
  }

  std::string base_;
  std::vector<QName> stack_;
  std::string text_;
  std::unique_ptr<RawEntry> current_;
  std::size_t entry_depth_ = 0;
};

}  // namespace

FeedExtraction extract_feed(const SourceDocument& doc) {
  std::string base = doc.final_uri.empty() ? doc.request_uri : doc.final_uri;
  FeedParser parser(base);
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> xml(
      XML_ParserCreateNS(nullptr, '\x1f'), &XML_ParserFree);
  if (!xml) throw FeedParseError("cannot allocate XML parser");
  XML_SetUserData(xml.get(), &parser);
  XML_SetElementHandler(xml.get(), &FeedParser::on_start, &FeedParser::on_end);
  XML_SetCharacterDataHandler(xml.get(), &FeedParser::on_text);
  XML_SetParamEntityParsing(xml.get(), XML_PARAM_ENTITY_PARSING_NEVER);

  const std::string& body = doc.body;
  constexpr std::size_t kChunk = 1 << 16;
  std::size_t offset = 0;
  do {
    std::size_t n = std::min(kChunk, body.size() - offset);
    bool last = offset + n == body.size();
    if (XML_Parse(xml.get(), body.data() + offset, static_cast<int>(n), last) == XML_STATUS_ERROR) {
      throw FeedParseError(std::string("malformed feed XML: ") +
                           XML_ErrorString(XML_GetErrorCode(xml.get())) + " at line " +
                           std::to_string(XML_GetCurrentLineNumber(xml.get())));
    }
    if (parser.too_deep()) throw FeedParseError("feed nesting too deep");
    offset += n;
  } while (offset < body.size());

  if (parser.kind == FeedKind::kUnknown) throw FeedParseError("document is not an RSS or Atom feed");

  FeedExtraction out;
  out.info.container = parser.feed_title.empty() ? std::nullopt
                                                 : std::optional<std::string>(parser.feed_title);
  SourceKind source = parser.kind == FeedKind::kAtom ? SourceKind::kAtom : SourceKind::kRss;
  std::optional<std::string> common;
  bool unanimous = !parser.entries.empty();

  for (const RawEntry& raw : parser.entries) {
    if (raw.authors.size() != 1 || (common && *common != raw.authors.front())) {
      unanimous = false;
    } else if (!common) {
      common = raw.authors.front();
    }

    FieldValues fields;
    std::optional<std::string> entry_uri;
    if (source == SourceKind::kAtom) {
      if (!raw.atom_alternate.empty()) {
        entry_uri = try_resolve_reference(base, raw.atom_alternate);
        fields.canonical_uri = entry_uri;
      }
    } else {
      if (!raw.link.empty()) entry_uri = try_resolve_reference(base, raw.link);
      bool absolute_guid = text::istarts_with(raw.guid, "http://") ||
                           text::istarts_with(raw.guid, "https://");
      if (raw.guid_permalink && absolute_guid) {
        fields.canonical_uri = try_normalize_uri(raw.guid);
        if (!entry_uri) entry_uri = fields.canonical_uri;
      }
    }
    if (!entry_uri) continue;
    if (!raw.title.empty()) fields.title = raw.title;
    for (const auto& a : raw.authors) fields.authors.push_back(Person::from_literal(a));
    fields.issued = parse_date(raw.date);
    if (!fields.issued) fields.issued = parse_date(raw.updated);
    fields.container = out.info.container;
    auto fragment = make_fragment(source, std::move(fields), doc.fetched_at);
    if (fragment) out.entries.push_back({*entry_uri, std::move(*fragment)});
  }
  if (unanimous && common) out.info.common_author = common;
  return out;
}

}  // namespace greyharvest
