#include "greyharvest/html.hpp"

#include <algorithm>
#include <array>

#include "greyharvest/error.hpp"
#include "greyharvest/text.hpp"

namespace greyharvest::html {

namespace {

constexpr std::size_t kMaxDepth = 512;

struct NamedEntity {
  std::string_view name;
  std::uint32_t codepoint;
};

// Sorted by name for binary search.
constexpr std::array<NamedEntity, 62> kEntities = {{
    {"aacute", 0xE1}, {"acirc", 0xE2},   {"aelig", 0xE6},  {"agrave", 0xE0}, {"amp", 0x26},
    {"apos", 0x27},   {"aring", 0xE5},   {"atilde", 0xE3}, {"auml", 0xE4},   {"bdquo", 0x201E},
    {"bull", 0x2022}, {"ccedil", 0xE7},  {"copy", 0xA9},   {"dagger", 0x2020}, {"deg", 0xB0},
    {"eacute", 0xE9}, {"ecirc", 0xEA},   {"egrave", 0xE8}, {"euml", 0xEB},   {"euro", 0x20AC},
    {"gt", 0x3E},     {"hellip", 0x2026}, {"iacute", 0xED}, {"icirc", 0xEE},  {"iexcl", 0xA1},
    {"igrave", 0xEC}, {"iquest", 0xBF},  {"iuml", 0xEF},   {"laquo", 0xAB},  {"ldquo", 0x201C},
    {"lsaquo", 0x2039}, {"lsquo", 0x2018}, {"lt", 0x3C},   {"mdash", 0x2014}, {"middot", 0xB7},
    {"nbsp", 0xA0},   {"ndash", 0x2013}, {"ntilde", 0xF1}, {"oacute", 0xF3}, {"ocirc", 0xF4},
    {"oelig", 0x153}, {"ograve", 0xF2},  {"oslash", 0xF8}, {"otilde", 0xF5}, {"ouml", 0xF6},
    {"para", 0xB6},   {"pound", 0xA3},   {"quot", 0x22},   {"raquo", 0xBB},  {"rdquo", 0x201D},
    {"reg", 0xAE},    {"rsaquo", 0x203A}, {"rsquo", 0x2019}, {"sbquo", 0x201A}, {"sect", 0xA7},
    {"shy", 0xAD},    {"szlig", 0xDF},   {"trade", 0x2122}, {"uacute", 0xFA}, {"ucirc", 0xFB},
    {"ugrave", 0xF9}, {"uuml", 0xFC},
}};

std::optional<std::uint32_t> lookup_entity(std::string_view name) {
  auto it = std::lower_bound(kEntities.begin(), kEntities.end(), name,
                             [](const NamedEntity& e, std::string_view n) { return e.name < n; });
  if (it != kEntities.end() && it->name == name) return it->codepoint;
  return std::nullopt;
}

bool is_void_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 15> kVoid = {
      "area", "base", "br", "col", "embed", "hr", "img", "input", "keygen", "link",
      "meta", "param", "source", "track", "wbr"};
  return std::find(kVoid.begin(), kVoid.end(), tag) != kVoid.end();
}

bool is_block_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 24> kBlock = {
      "address", "article", "aside", "blockquote", "div", "dl", "fieldset", "footer",
      "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "main", "nav", "ol", "p",
      "pre", "section", "table"};
  return std::find(kBlock.begin(), kBlock.end(), tag) != kBlock.end() || tag == "ul";
}

bool is_name_char(char c) {
  return text::is_ascii_alpha(c) || text::is_ascii_digit(c) || c == '-' || c == '_' || c == ':' ||
         c == '.';
}

}  // namespace

std::string decode_entities(std::string_view s) {
  if (s.find('&') == std::string_view::npos) return std::string(s);
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    std::size_t j = i + 1;
    if (j < s.size() && s[j] == '#') {
      ++j;
      bool hex = j < s.size() && (s[j] == 'x' || s[j] == 'X');
      if (hex) ++j;
      std::size_t start = j;
      std::uint32_t cp = 0;
      while (j < s.size() && j - start < 8) {
        char c = s[j];
        int v = -1;
        if (text::is_ascii_digit(c)) {
          v = c - '0';
        } else if (hex && c >= 'a' && c <= 'f') {
          v = c - 'a' + 10;
        } else if (hex && c >= 'A' && c <= 'F') {
          v = c - 'A' + 10;
        }
        if (v < 0) break;
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        ++j;
      }
      if (j == start) {
        out.push_back('&');
        continue;
      }
      if (j < s.size() && s[j] == ';') ++j;
      if (cp == 0) cp = 0xFFFD;
      text::append_utf8(out, cp);
      i = j - 1;
      continue;
    }
    std::size_t start = j;
    while (j < s.size() && j - start < 10 && (text::is_ascii_alpha(s[j]) || text::is_ascii_digit(s[j])))
      ++j;
    std::string_view name = s.substr(start, j - start);
    auto cp = lookup_entity(name);
    if (cp && j < s.size() && s[j] == ';') {
      text::append_utf8(out, *cp);
      i = j;
    } else if (cp && (name == "amp" || name == "lt" || name == "gt" || name == "quot" ||
                      name == "nbsp")) {
      text::append_utf8(out, *cp);
      i = j - 1;
    } else {
      out.push_back('&');
    }
  }
  return out;
}

std::string escape_attribute(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

const std::string* Node::attr(std::string_view attr_name) const {
  for (const auto& [key, value] : attributes) {
    if (key == attr_name) return &value;
  }
  return nullptr;
}

bool Node::has_class(std::string_view cls) const {
  const std::string* classes = attr("class");
  if (!classes) return false;
  std::string_view rest = *classes;
  while (!rest.empty()) {
    std::size_t b = 0;
    while (b < rest.size() && text::is_space(rest[b])) ++b;
    std::size_t e = b;
    while (e < rest.size() && !text::is_space(rest[e])) ++e;
    if (e > b && rest.substr(b, e - b) == cls) return true;
    rest.remove_prefix(e);
  }
  return false;
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::string_view src) : src_(src) {
    Node root;
    root.name = "#document";
    doc_.nodes_.push_back(std::move(root));
    stack_.push_back(0);
  }

  Document build() {
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<') {
        parse_markup();
      } else {
        std::size_t next = src_.find('<', pos_);
        if (next == std::string_view::npos) next = src_.size();
        add_text(decode_entities(src_.substr(pos_, next - pos_)));
        pos_ = next;
      }
    }
    return std::move(doc_);
  }

 private:
  void parse_markup() {
    std::string_view rest = src_.substr(pos_);
    if (rest.rfind("<!--", 0) == 0) {
      std::size_t end = src_.find("-->", pos_ + 4);
      pos_ = end == std::string_view::npos ? src_.size() : end + 3;
      return;
    }
    if (rest.size() > 1 && (rest[1] == '!' || rest[1] == '?')) {
      std::size_t end = src_.find('>', pos_);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      return;
    }
    if (rest.size() > 2 && rest[1] == '/' && text::is_ascii_alpha(rest[2])) {
      std::size_t i = pos_ + 2;
      std::size_t start = i;
      while (i < src_.size() && is_name_char(src_[i])) ++i;
      std::string tag = text::to_lower(src_.substr(start, i - start));
      std::size_t end = src_.find('>', i);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      close_element(tag);
      return;
    }
    if (rest.size() > 1 && text::is_ascii_alpha(rest[1])) {
      parse_start_tag();
      return;
    }
    add_text("<");
    ++pos_;
  }

  void parse_start_tag() {
    std::size_t i = pos_ + 1;
    std::size_t start = i;
    while (i < src_.size() && is_name_char(src_[i])) ++i;
    Node element;
    element.name = text::to_lower(src_.substr(start, i - start));
    bool self_closing = false;
    while (true) {
      while (i < src_.size() && (text::is_space(src_[i]) || src_[i] == '/')) {
        if (src_[i] == '/') self_closing = true;
        ++i;
      }
      if (i >= src_.size()) {
        pos_ = src_.size();  // unterminated tag: dropped
        return;
      }
      if (src_[i] == '>') {
        ++i;
        break;
      }
      self_closing = false;
      std::size_t name_start = i;
      while (i < src_.size() && !text::is_space(src_[i]) && src_[i] != '=' && src_[i] != '>' &&
             src_[i] != '/') {
        ++i;
      }
      if (i == name_start) {
        ++i;
        continue;
      }
      std::string name = text::to_lower(src_.substr(name_start, i - name_start));
      std::string value;
      std::size_t j = i;
      while (j < src_.size() && text::is_space(src_[j])) ++j;
      if (j < src_.size() && src_[j] == '=') {
        ++j;
        while (j < src_.size() && text::is_space(src_[j])) ++j;
        if (j < src_.size() && (src_[j] == '"' || src_[j] == '\'')) {
          char quote = src_[j++];
          std::size_t vstart = j;
          std::size_t vend = src_.find(quote, j);
          if (vend == std::string_view::npos) {
            pos_ = src_.size();
            return;
          }
          value = decode_entities(src_.substr(vstart, vend - vstart));
          j = vend + 1;
        } else {
          std::size_t vstart = j;
          while (j < src_.size() && !text::is_space(src_[j]) && src_[j] != '>') ++j;
          value = decode_entities(src_.substr(vstart, j - vstart));
        }
        i = j;
      }
      if (!element.attr(name)) element.attributes.emplace_back(std::move(name), std::move(value));
    }
    pos_ = i;
    std::string tag = element.name;
    open_element(std::move(element));
    if (is_void_element(tag) || self_closing) {
      if (stack_.size() > 1 && doc_.nodes_[stack_.back()].name == tag) stack_.pop_back();
      return;
    }
    if (tag == "script" || tag == "style") {
      pos_ = skip_raw_text(tag);
      close_element(tag);
    } else if (tag == "title" || tag == "textarea") {
      std::size_t end = find_end_tag(tag);
      add_text(decode_entities(src_.substr(pos_, end - pos_)));
      pos_ = end;
    }
  }

  std::size_t find_end_tag(std::string_view tag) const {
    std::string needle = "</" + std::string(tag);
    std::size_t end = text::ifind(src_, needle, pos_);
    return end == std::string_view::npos ? src_.size() : end;
  }

  std::size_t skip_raw_text(std::string_view tag) const {
    std::size_t end = find_end_tag(tag);
    if (end == src_.size()) return end;
    std::size_t close = src_.find('>', end);
    return close == std::string_view::npos ? src_.size() : close + 1;
  }

  // Closes `tag` if it is open below the nearest element in `boundaries`.
  void close_implied(std::initializer_list<std::string_view> tags,
                     std::initializer_list<std::string_view> boundaries) {
    for (std::size_t k = stack_.size(); k-- > 1;) {
      const std::string& name = doc_.nodes_[stack_[k]].name;
      if (std::find(tags.begin(), tags.end(), name) != tags.end()) {
        stack_.resize(k);
        return;
      }
      if (std::find(boundaries.begin(), boundaries.end(), name) != boundaries.end()) return;
    }
  }

  void open_element(Node element) {
    const std::string& tag = element.name;
    if (tag == "li") {
      close_implied({"li"}, {"ul", "ol", "menu"});
    } else if (tag == "dt" || tag == "dd") {
      close_implied({"dt", "dd"}, {"dl"});
    } else if (tag == "tr") {
      close_implied({"tr"}, {"table", "tbody", "thead", "tfoot"});
    } else if (tag == "td" || tag == "th") {
      close_implied({"td", "th"}, {"tr", "table"});
    } else if (tag == "option") {
      close_implied({"option"}, {"select", "datalist"});
    }
    if (is_block_element(tag) && stack_.size() > 1 && doc_.nodes_[stack_.back()].name == "p") {
      stack_.pop_back();
    }
    NodeId parent = stack_.back();
    element.parent = parent;
    NodeId id = doc_.nodes_.size();
    doc_.nodes_.push_back(std::move(element));
    doc_.nodes_[parent].children.push_back(id);
    if (stack_.size() < kMaxDepth) {
      stack_.push_back(id);
    }
  }

  void close_element(const std::string& tag) {
    for (std::size_t k = stack_.size(); k-- > 1;) {
      if (doc_.nodes_[stack_[k]].name == tag) {
        stack_.resize(k);
        return;
      }
    }
  }

  void add_text(std::string content) {
    if (content.empty()) return;
    NodeId parent = stack_.back();
    Node& p = doc_.nodes_[parent];
    if (!p.children.empty()) {
      Node& last = doc_.nodes_[p.children.back()];
      if (last.kind == Node::Kind::kText) {
        last.name += content;
        return;
      }
    }
    Node t;
    t.kind = Node::Kind::kText;
    t.name = std::move(content);
    t.parent = parent;
    NodeId id = doc_.nodes_.size();
    doc_.nodes_.push_back(std::move(t));
    doc_.nodes_[parent].children.push_back(id);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Document doc_;
  std::vector<NodeId> stack_;
};

Document Document::parse(std::string_view source) { return TreeBuilder(source).build(); }

std::vector<NodeId> Document::elements(std::string_view tag) const {
  std::vector<NodeId> out;
  for (NodeId id = 1; id < nodes_.size(); ++id) {
    if (nodes_[id].is_element() && nodes_[id].name == tag) out.push_back(id);
  }
  return out;
}

std::string Document::text_content(NodeId id) const {
  const Node& n = nodes_[id];
  if (n.kind == Node::Kind::kText) return n.name;
  std::string out;
  // Descendants occupy a contiguous id range after `id`.
  for (NodeId k = id + 1; k < nodes_.size() && is_descendant(k, id); ++k) {
    if (nodes_[k].kind == Node::Kind::kText) out += nodes_[k].name;
  }
  return out;
}

bool Document::is_descendant(NodeId node, NodeId ancestor) const {
  while (node != 0) {
    node = nodes_[node].parent;
    if (node == ancestor) return true;
  }
  return false;
}

std::optional<NodeId> Document::closest(NodeId from, std::string_view tag) const {
  NodeId cur = from;
  while (cur != 0) {
    if (nodes_[cur].is_element() && nodes_[cur].name == tag) return cur;
    cur = nodes_[cur].parent;
  }
  return std::nullopt;
}

std::vector<NodeId> Document::select(const Selector& selector, NodeId scope) const {
  std::vector<NodeId> out;
  for (NodeId id = scope + 1; id < nodes_.size(); ++id) {
    if (scope != 0 && !is_descendant(id, scope)) break;
    if (nodes_[id].is_element() && selector.matches(*this, id)) out.push_back(id);
  }
  return out;
}

Selector Selector::parse(std::string_view text_in) {
  Selector sel;
  sel.source_ = std::string(text_in);
  std::string_view s = text::trim(text_in);
  if (s.empty()) throw ConfigError("empty selector");
  std::size_t i = 0;
  bool child_next = false;
  auto read_ident = [&](std::size_t& k) {
    std::size_t start = k;
    while (k < s.size() && (is_name_char(s[k]) && s[k] != '.')) ++k;
    return std::string(s.substr(start, k - start));
  };
  while (i < s.size()) {
    while (i < s.size() && text::is_space(s[i])) ++i;
    if (i < s.size() && s[i] == '>') {
      if (sel.compounds_.empty() || child_next) throw ConfigError("dangling '>' in selector");
      child_next = true;
      ++i;
      continue;
    }
    if (i >= s.size()) break;
    Compound c;
    c.child_of_previous = child_next;
    child_next = false;
    bool any = false;
    if (s[i] == '*') {
      ++i;
      any = true;
    } else if (is_name_char(s[i]) && s[i] != '.') {
      c.tag = text::to_lower(read_ident(i));
      any = true;
    }
    while (i < s.size() && !text::is_space(s[i]) && s[i] != '>') {
      char kind = s[i++];
      if (kind == '.') {
        std::string cls = read_ident(i);
        if (cls.empty()) throw ConfigError("empty class in selector: " + sel.source_);
        c.classes.push_back(std::move(cls));
      } else if (kind == '#') {
        c.id = read_ident(i);
        if (c.id.empty()) throw ConfigError("empty id in selector: " + sel.source_);
      } else if (kind == '[') {
        std::size_t close = s.find(']', i);
        if (close == std::string_view::npos) throw ConfigError("unterminated [ in selector");
        std::string_view body = s.substr(i, close - i);
        AttributeTest test;
        if (auto eq = body.find('='); eq != std::string_view::npos) {
          test.name = text::to_lower(text::trim(body.substr(0, eq)));
          std::string value(text::trim(body.substr(eq + 1)));
          if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'')) {
            value = value.substr(1, value.size() - 2);
          }
          test.value = std::move(value);
        } else {
          test.name = text::to_lower(text::trim(body));
        }
        if (test.name.empty()) throw ConfigError("empty attribute in selector");
        c.attributes.push_back(std::move(test));
        i = close + 1;
      } else {
        throw ConfigError("unexpected character in selector: " + sel.source_);
      }
      any = true;
    }
    if (!any) throw ConfigError("bad selector: " + sel.source_);
    sel.compounds_.push_back(std::move(c));
  }
  if (sel.compounds_.empty() || child_next) throw ConfigError("bad selector: " + sel.source_);
  return sel;
}

bool Selector::matches_compound(const Compound& c, const Node& n) const {
  if (!n.is_element()) return false;
  if (!c.tag.empty() && n.name != c.tag) return false;
  if (!c.id.empty()) {
    const std::string* id = n.attr("id");
    if (!id || *id != c.id) return false;
  }
  for (const auto& cls : c.classes) {
    if (!n.has_class(cls)) return false;
  }
  for (const auto& test : c.attributes) {
    const std::string* v = n.attr(test.name);
    if (!v) return false;
    if (test.value && !text::iequals(*v, *test.value)) return false;
  }
  return true;
}

bool Selector::matches_from(const Document& doc, NodeId id, std::size_t index) const {
  if (!matches_compound(compounds_[index], doc.node(id))) return false;
  if (index == 0) return true;
  bool child = compounds_[index].child_of_previous;
  NodeId cur = doc.node(id).parent;
  while (cur != 0) {
    if (matches_from(doc, cur, index - 1)) return true;
    if (child) return false;
    cur = doc.node(cur).parent;
  }
  return false;
}

bool Selector::matches(const Document& doc, NodeId id) const {
  return !compounds_.empty() && matches_from(doc, id, compounds_.size() - 1);
}

}  // namespace greyharvest::html
