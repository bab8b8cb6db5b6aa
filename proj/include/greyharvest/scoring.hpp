#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "greyharvest/json_codec.hpp"
#include "greyharvest/model.hpp"

namespace greyharvest {

/// Per-(source, field) merge weights plus the heuristics' word lists.
/// Weights for letters a source is not granted are always 0.
class ScoreTable {
 public:
  static const ScoreTable& defaults();

  /// Overlays a configuration object onto `base`:
  ///   {"weights": {"<source>": 70 | {"<field>": 70, ...}},
  ///    "author_blocklist": [...], "title_delimiters": [...]}
  /// Throws ConfigError on unknown sources/fields or negative weights.
  static ScoreTable from_json(const json::Json& config, const ScoreTable& base = defaults());

  int weight(SourceKind source, Field field) const;
  void set_weight(SourceKind source, Field field, int weight);

  /// Highest weight over the populated fields.
  int score(SourceKind source, const FieldValues& fields) const;

  const std::set<std::string>& author_blocklist() const { return author_blocklist_; }
  const std::vector<std::string>& title_delimiters() const { return title_delimiters_; }
  void set_author_blocklist(std::set<std::string> list) { author_blocklist_ = std::move(list); }
  void set_title_delimiters(std::vector<std::string> d) { title_delimiters_ = std::move(d); }

 private:
  std::array<std::array<int, kAllFields.size()>, kSourceKindCount> weights_{};
  std::set<std::string> author_blocklist_;
  std::vector<std::string> title_delimiters_;
};

}  // namespace greyharvest
