#pragma once

// Lenient HTML parsing into a flat, index-addressed node tree, plus a small
// CSS-like selector engine used by the site rules.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace greyharvest::html {

using NodeId = std::size_t;

struct Node {
  enum class Kind : std::uint8_t { kElement, kText };

  Kind kind = Kind::kElement;
  std::string name;  // lowercase tag name, or the decoded text for text nodes
  std::vector<std::pair<std::string, std::string>> attributes;  // names lowercase
  std::vector<NodeId> children;
  NodeId parent = 0;

  bool is_element() const { return kind == Kind::kElement; }
  const std::string* attr(std::string_view attr_name) const;
  bool has_class(std::string_view cls) const;
};

class Selector;

/// Parsed document. Node 0 is the synthetic root; node ids follow document
/// order, so iterating ids in sequence is a pre-order walk.
class Document {
 public:
  static Document parse(std::string_view source);

  const Node& node(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  static constexpr NodeId root() { return 0; }

  std::vector<NodeId> elements(std::string_view tag) const;
  std::string text_content(NodeId id) const;
  bool is_descendant(NodeId node, NodeId ancestor) const;
  std::optional<NodeId> closest(NodeId from, std::string_view tag) const;

  std::vector<NodeId> select(const Selector& selector, NodeId scope = root()) const;

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
};

/// Compound selectors joined by descendant (whitespace) or child (>)
/// combinators. A compound is tag? (#id | .class | [attr] | [attr=value])*.
class Selector {
 public:
  /// Throws greyharvest::ConfigError on syntax errors.
  static Selector parse(std::string_view text);

  bool matches(const Document& doc, NodeId id) const;
  const std::string& source() const { return source_; }

 private:
  struct AttributeTest {
    std::string name;
    std::optional<std::string> value;
  };
  struct Compound {
    std::string tag;  // empty = any
    std::string id;
    std::vector<std::string> classes;
    std::vector<AttributeTest> attributes;
    bool child_of_previous = false;
  };

  bool matches_compound(const Compound& c, const Node& n) const;
  bool matches_from(const Document& doc, NodeId id, std::size_t index) const;

  std::vector<Compound> compounds_;
  std::string source_;
};

std::string decode_entities(std::string_view text);
std::string escape_attribute(std::string_view text);
std::string escape_text(std::string_view text);

}  // namespace greyharvest::html
