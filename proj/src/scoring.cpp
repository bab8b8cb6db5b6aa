#include "greyharvest/scoring.hpp"

#include "greyharvest/error.hpp"
#include "greyharvest/text.hpp"

namespace greyharvest {

namespace {

int default_weight(SourceKind source, Field field) {
  switch (source) {
    case SourceKind::kGoogleScholar:
    case SourceKind::kEprints:
    case SourceKind::kDublinCore:
    case SourceKind::kCoins:
      return 90;
    case SourceKind::kOgp:
      return 80;
    case SourceKind::kW3c:
    case SourceKind::kCeurWs:
    case SourceKind::kScienceDirect:
    case SourceKind::kWorldCat:
    case SourceKind::kOrcid:
    case SourceKind::kOpenLibrary:
    case SourceKind::kMendeley:
    case SourceKind::kSiteRule:
      return 75;
    case SourceKind::kRss:
    case SourceKind::kAtom:
    case SourceKind::kPrism:
      return 70;
    case SourceKind::kSchemaOrg:
      return 60;
    case SourceKind::kMeta:
      return 50;
    case SourceKind::kPdf:
      return 35;
    case SourceKind::kTwitter:
      return field == Field::kAuthors ? 20 : 40;  // a handle is a weak name
    case SourceKind::kHtmlTitle:
      return 30;
    case SourceKind::kFeedInference:
      return 20;
    case SourceKind::kUriDate:
      return 10;
  }
  return 0;
}

ScoreTable build_defaults() {
  ScoreTable t;
  for (SourceKind s : all_source_kinds()) {
    for (Field f : kAllFields) t.set_weight(s, f, default_weight(s, f));
  }
  t.set_author_blocklist({"admin", "blog admin", "administrator", "webmaster", "root"});
  t.set_title_delimiters({" | ", " – ", " — ", " :: ", " - "});
  return t;
}

int read_weight(const json::Json& v) {
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 100000) {
    throw ConfigError("weights must be non-negative integers");
  }
  return v.get<int>();
}

}  // namespace

const ScoreTable& ScoreTable::defaults() {
  static const ScoreTable table = build_defaults();
  return table;
}

ScoreTable ScoreTable::from_json(const json::Json& config, const ScoreTable& base) {
  ScoreTable t = base;
  if (!config.is_object()) throw ConfigError("score table config must be an object");
  if (config.contains("weights")) {
    const auto& weights = config.at("weights");
    if (!weights.is_object()) throw ConfigError("weights must be an object");
    for (const auto& [name, value] : weights.items()) {
      auto source = source_kind_from_string(name);
      if (!source) throw ConfigError("unknown source in weights: " + name);
      if (value.is_object()) {
        for (const auto& [field_name, w] : value.items()) {
          auto field = field_from_string(field_name);
          if (!field) throw ConfigError("unknown field in weights: " + field_name);
          t.set_weight(*source, *field, read_weight(w));
        }
      } else {
        int w = read_weight(value);
        for (Field f : kAllFields) t.set_weight(*source, f, w);
      }
    }
  }
  if (config.contains("author_blocklist")) {
    std::set<std::string> list;
    for (const auto& v : config.at("author_blocklist")) {
      if (!v.is_string()) throw ConfigError("author_blocklist entries must be strings");
      list.insert(text::to_lower(text::collapse_whitespace(v.get<std::string>())));
    }
    t.author_blocklist_ = std::move(list);
  }
  if (config.contains("title_delimiters")) {
    std::vector<std::string> delimiters;
    for (const auto& v : config.at("title_delimiters")) {
      if (!v.is_string() || v.get<std::string>().empty()) {
        throw ConfigError("title_delimiters entries must be non-empty strings");
      }
      delimiters.push_back(v.get<std::string>());
    }
    t.title_delimiters_ = std::move(delimiters);
  }
  return t;
}

int ScoreTable::weight(SourceKind source, Field field) const {
  if (!grants(source, field)) return 0;
  return weights_[static_cast<std::size_t>(source)][static_cast<std::size_t>(field)];
}

void ScoreTable::set_weight(SourceKind source, Field field, int weight) {
  weights_[static_cast<std::size_t>(source)][static_cast<std::size_t>(field)] = weight;
}

int ScoreTable::score(SourceKind source, const FieldValues& fields) const {
  int best = 0;
  for (Field f : kAllFields) {
    if (fields.has(f)) best = std::max(best, weight(source, f));
  }
  return best;
}

}  // namespace greyharvest
