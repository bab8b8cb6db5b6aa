// Best-effort reader for the PDF document information dictionary. Only
// uncompressed objects are understood; anything else yields nothing.

#include <optional>
#include <string>
#include <string_view>

#include "greyharvest/extractors.hpp"
#include "greyharvest/text.hpp"

namespace greyharvest {

namespace {

constexpr std::size_t kMaxStringBytes = 1 << 16;

bool is_pdf_space(char c) {
  return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\0';
}

bool is_delimiter(char c) {
  return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' ||
         c == '}' || c == '/' || c == '%';
}

class Lexer {
 public:
  Lexer(std::string_view s, std::size_t pos) : s_(s), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  bool eof() const { return pos_ >= s_.size(); }

  void skip_space() {
    while (pos_ < s_.size()) {
      if (is_pdf_space(s_[pos_])) {
        ++pos_;
      } else if (s_[pos_] == '%') {
        while (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  bool consume(std::string_view token) {
    skip_space();
    if (s_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }

  std::optional<long> integer() {
    skip_space();
    std::size_t start = pos_;
    long v = 0;
    while (pos_ < s_.size() && text::is_ascii_digit(s_[pos_]) && pos_ - start < 10) {
      v = v * 10 + (s_[pos_] - '0');
      ++pos_;
    }
    if (pos_ == start) return std::nullopt;
    return v;
  }

  std::optional<std::string> name() {
    skip_space();
    if (pos_ >= s_.size() || s_[pos_] != '/') return std::nullopt;
    ++pos_;
    std::size_t start = pos_;
    while (pos_ < s_.size() && !is_pdf_space(s_[pos_]) && !is_delimiter(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  // Literal string with escapes and balanced parentheses.
  std::optional<std::string> literal_string() {
    if (pos_ >= s_.size() || s_[pos_] != '(') return std::nullopt;
    ++pos_;
    std::string out;
    int depth = 1;
    while (pos_ < s_.size() && out.size() < kMaxStringBytes) {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) return std::nullopt;
        char e = s_[pos_++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 'r': out.push_back('\r'); break;
          case 't': out.push_back('\t'); break;
          case 'b': out.push_back('\b'); break;
          case 'f': out.push_back('\f'); break;
          case '\r':
            if (pos_ < s_.size() && s_[pos_] == '\n') ++pos_;
            break;
          case '\n': break;
          default:
            if (e >= '0' && e <= '7') {
              int v = e - '0';
              for (int k = 0; k < 2 && pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '7'; ++k) {
                v = v * 8 + (s_[pos_++] - '0');
              }
              out.push_back(static_cast<char>(v & 0xFF));
            } else {
              out.push_back(e);
            }
        }
      } else if (c == '(') {
        ++depth;
        out.push_back(c);
      } else if (c == ')') {
        if (--depth == 0) return out;
        out.push_back(c);
      } else {
        out.push_back(c);
      }
    }
    return std::nullopt;
  }

  std::optional<std::string> hex_string() {
    if (pos_ >= s_.size() || s_[pos_] != '<') return std::nullopt;
    ++pos_;
    std::string out;
    int pending = -1;
    while (pos_ < s_.size() && out.size() < kMaxStringBytes) {
      char c = s_[pos_++];
      if (c == '>') {
        if (pending >= 0) out.push_back(static_cast<char>(pending << 4));
        return out;
      }
      int v;
      if (c >= '0' && c <= '9') v = c - '0';
      else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
      else if (is_pdf_space(c)) continue;
      else return std::nullopt;
      if (pending < 0) {
        pending = v;
      } else {
        out.push_back(static_cast<char>((pending << 4) | v));
        pending = -1;
      }
    }
    return std::nullopt;
  }

  // Skips any value; returns false on malformed input.
  bool skip_value(int depth = 0) {
    if (depth > 32) return false;
    skip_space();
    if (pos_ >= s_.size()) return false;
    char c = s_[pos_];
    if (c == '(') return literal_string().has_value();
    if (c == '/') return name().has_value();
    if (s_.substr(pos_, 2) == "<<") return skip_dict(depth + 1);
    if (c == '<') return hex_string().has_value();
    if (c == '[') {
      ++pos_;
      while (true) {
        skip_space();
        if (pos_ >= s_.size()) return false;
        if (s_[pos_] == ']') {
          ++pos_;
          return true;
        }
        if (!skip_value(depth + 1)) return false;
      }
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && !is_pdf_space(s_[pos_]) && !is_delimiter(s_[pos_])) ++pos_;
    return pos_ > start;
  }

  bool skip_dict(int depth) {
    if (!consume("<<")) return false;
    while (true) {
      skip_space();
      if (consume(">>")) return true;
      if (!name() || !skip_value(depth)) return false;
    }
  }

 private:
  std::string_view s_;
  std::size_t pos_;
};

std::string decode_pdf_text(const std::string& raw) {
  if (raw.size() >= 2 && static_cast<unsigned char>(raw[0]) == 0xFE &&
      static_cast<unsigned char>(raw[1]) == 0xFF) {
    std::string out;
    for (std::size_t i = 2; i + 1 < raw.size(); i += 2) {
      std::uint32_t unit = (static_cast<unsigned char>(raw[i]) << 8) |
                           static_cast<unsigned char>(raw[i + 1]);
      if (unit >= 0xD800 && unit <= 0xDBFF && i + 3 < raw.size()) {
        std::uint32_t low = (static_cast<unsigned char>(raw[i + 2]) << 8) |
                            static_cast<unsigned char>(raw[i + 3]);
        if (low >= 0xDC00 && low <= 0xDFFF) {
          text::append_utf8(out, 0x10000 + ((unit - 0xD800) << 10) + (low - 0xDC00));
          i += 2;
          continue;
        }
      }
      if (unit >= 0xD800 && unit <= 0xDFFF) unit = 0xFFFD;
      text::append_utf8(out, unit);
    }
    return out;
  }
  return text::to_utf8(raw, "iso-8859-1");
}

struct InfoFields {
  std::optional<std::string> title;
  std::optional<std::string> author;
};

std::optional<InfoFields> read_info_dict(Lexer& lex) {
  if (!lex.consume("<<")) return std::nullopt;
  InfoFields info;
  while (true) {
    lex.skip_space();
    if (lex.consume(">>")) return info;
    auto key = lex.name();
    if (!key) return std::nullopt;
    lex.skip_space();
    std::optional<std::string> value;
    Lexer probe = lex;
    if ((value = probe.literal_string()) || (value = probe.hex_string())) {
      lex = probe;
      if (*key == "Title") info.title = decode_pdf_text(*value);
      if (*key == "Author") info.author = decode_pdf_text(*value);
    } else if (!lex.skip_value()) {
      return std::nullopt;
    }
  }
}

// Finds "N G obj" at a token boundary, searching from the end.
std::optional<std::size_t> find_object(std::string_view body, long num, long gen) {
  std::string needle = std::to_string(num) + " " + std::to_string(gen) + " obj";
  std::size_t pos = body.size();
  while (true) {
    pos = body.rfind(needle, pos == 0 ? 0 : pos - 1);
    if (pos == std::string_view::npos) return std::nullopt;
    if (pos == 0 || is_pdf_space(body[pos - 1])) return pos + needle.size();
  }
}

std::vector<std::string> split_authors(const std::string& author) {
  std::vector<std::string> out;
  for (const auto& part : text::split(author, ";")) {
    std::string rest = part;
    while (true) {
      auto at = text::ifind(rest, " and ");
      std::string head = at == std::string::npos ? rest : rest.substr(0, at);
      std::string c = text::collapse_whitespace(head);
      if (!c.empty()) out.push_back(c);
      if (at == std::string::npos) break;
      rest = rest.substr(at + 5);
    }
  }
  return out;
}

}  // namespace

ExtractionResult extract_pdf_info(const SourceDocument& doc) {
  ExtractionResult r;
  std::string_view body = doc.body;
  if (body.substr(0, 5) != "%PDF-") return r;
  // Encrypted strings are unreadable without the key; treat as a failure.
  if (body.find("/Encrypt") != std::string_view::npos) return r;

  std::size_t info_pos = body.rfind("/Info");
  if (info_pos == std::string_view::npos) return r;
  Lexer lex(body, info_pos + 5);
  std::optional<InfoFields> info;
  lex.skip_space();
  if (lex.consume("<<")) {
    Lexer inline_lex(body, info_pos + 5);
    info = read_info_dict(inline_lex);
  } else {
    auto num = lex.integer();
    auto gen = lex.integer();
    if (!num || !gen || !lex.consume("R")) return r;
    auto obj = find_object(body, *num, *gen);
    if (!obj) return r;
    Lexer obj_lex(body, *obj);
    info = read_info_dict(obj_lex);
  }
  if (!info) return r;

  FieldValues fields;
  if (info->title) {
    std::string t = text::collapse_whitespace(*info->title);
    if (!t.empty()) fields.title = t;
  }
  if (info->author) {
    for (const auto& a : split_authors(*info->author)) fields.authors.push_back(Person::from_literal(a));
  }
  if (auto f = make_fragment(SourceKind::kPdf, std::move(fields), doc.fetched_at)) {
    r.fragments.push_back(std::move(*f));
  }
  return r;
}

}  // namespace greyharvest
