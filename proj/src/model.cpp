#include "greyharvest/model.hpp"

#include <cstdio>
#include <ctime>

#include "greyharvest/text.hpp"

namespace greyharvest {

Timestamp system_now() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

Timestamp make_timestamp(int year, int month, int day, int hour, int minute, int second) {
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = minute;
  tm.tm_sec = second;
  return Timestamp{std::chrono::seconds{timegm(&tm)}};
}

std::string format_timestamp(Timestamp t) {
  std::time_t tt = t.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  std::string copy(text);
  char z = 0;
  if (std::sscanf(copy.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 ||
      z != 'Z') {
    return std::nullopt;
  }
  if (!PartialDate::make(y, mo, d, 1) || h > 23 || mi > 59 || s > 60) return std::nullopt;
  return make_timestamp(y, mo, d, h, mi, s);
}

int days_in_month(int year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[month - 1];
}

std::optional<PartialDate> PartialDate::make(int year, std::optional<int> month,
                                             std::optional<int> day, int min_year) {
  if (year < min_year || year > 9999) return std::nullopt;
  if (day && !month) return std::nullopt;
  if (month && (*month < 1 || *month > 12)) return std::nullopt;
  if (day && (*day < 1 || *day > days_in_month(year, *month))) return std::nullopt;
  return PartialDate{year, month, day};
}

std::string PartialDate::iso() const {
  char buf[16];
  if (day) {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, *month, *day);
  } else if (month) {
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, *month);
  } else {
    std::snprintf(buf, sizeof buf, "%04d", year);
  }
  return buf;
}

Person Person::from_literal(std::string_view raw) {
  Person p;
  p.literal = text::collapse_whitespace(raw);
  const std::string& lit = p.literal;
  if (auto comma = lit.find(','); comma != std::string::npos) {
    // Only the exact "Family, Given" shape splits, so literal stays reconstructible.
    if (comma > 0 && lit[comma - 1] != ' ' && comma + 2 < lit.size() && lit[comma + 1] == ' ') {
      p.family = lit.substr(0, comma);
      p.given = lit.substr(comma + 2);
    }
    return p;
  }
  if (auto space = lit.rfind(' '); space != std::string::npos) {
    p.given = lit.substr(0, space);
    p.family = lit.substr(space + 1);
  }
  return p;
}

namespace {

struct FieldName {
  Field field;
  std::string_view name;
};

constexpr FieldName kFieldNames[] = {{Field::kTitle, "title"},
                                     {Field::kAuthors, "authors"},
                                     {Field::kIssued, "issued"},
                                     {Field::kContainer, "container"},
                                     {Field::kCanonicalUri, "canonical_uri"}};

struct SourceInfo {
  SourceKind kind;
  std::string_view name;
  std::string_view letters;
};

constexpr SourceInfo kSources[] = {
    {SourceKind::kGoogleScholar, "google-scholar", "TCDA"},
    {SourceKind::kEprints, "eprints", "TCDA"},
    {SourceKind::kDublinCore, "dublin-core", "TCDA"},
    {SourceKind::kCoins, "coins", "TCDAI"},
    {SourceKind::kOgp, "ogp", "TCDAI"},
    {SourceKind::kW3c, "w3c", "TCDAI"},
    {SourceKind::kCeurWs, "ceur-ws", "TCDA"},
    {SourceKind::kScienceDirect, "sciencedirect", "TCD"},
    {SourceKind::kWorldCat, "worldcat", "TDA"},
    {SourceKind::kOrcid, "orcid", "TCA"},
    {SourceKind::kOpenLibrary, "openlibrary", "TCDI"},
    {SourceKind::kMendeley, "mendeley", "TCDA"},
    {SourceKind::kSiteRule, "site-rule", "TCDAI"},
    {SourceKind::kRss, "rss", "TCDAI"},
    {SourceKind::kAtom, "atom", "TCDAI"},
    {SourceKind::kPrism, "prism", "CD"},
    {SourceKind::kSchemaOrg, "schema-org", "TD"},
    {SourceKind::kMeta, "meta", "TCDA"},
    {SourceKind::kPdf, "pdf", "TA"},
    {SourceKind::kTwitter, "twitter", "TCAI"},
    {SourceKind::kHtmlTitle, "html-title", "T"},
    {SourceKind::kFeedInference, "feed-inference", "CA"},
    {SourceKind::kUriDate, "uri-date", "D"},
};

static_assert(std::size(kSources) == kSourceKindCount);

const SourceInfo& info(SourceKind kind) { return kSources[static_cast<std::size_t>(kind)]; }

}  // namespace

std::string_view to_string(Field field) { return kFieldNames[static_cast<int>(field)].name; }

std::optional<Field> field_from_string(std::string_view name) {
  for (const auto& f : kFieldNames) {
    if (f.name == name) return f.field;
  }
  return std::nullopt;
}

char field_letter(Field field) {
  switch (field) {
    case Field::kTitle: return 'T';
    case Field::kAuthors: return 'A';
    case Field::kIssued: return 'D';
    case Field::kContainer: return 'C';
    case Field::kCanonicalUri: return 'I';
  }
  return '?';
}

std::string_view to_string(SourceKind kind) { return info(kind).name; }

std::optional<SourceKind> source_kind_from_string(std::string_view name) {
  for (const auto& s : kSources) {
    if (s.name == name) return s.kind;
  }
  return std::nullopt;
}

std::vector<SourceKind> all_source_kinds() {
  std::vector<SourceKind> kinds;
  for (const auto& s : kSources) kinds.push_back(s.kind);
  return kinds;
}

std::string_view granted_letters(SourceKind kind) { return info(kind).letters; }

bool grants(SourceKind kind, Field field) {
  return granted_letters(kind).find(field_letter(field)) != std::string_view::npos;
}

bool FieldValues::has(Field field) const {
  switch (field) {
    case Field::kTitle: return title.has_value();
    case Field::kAuthors: return !authors.empty();
    case Field::kIssued: return issued.has_value();
    case Field::kContainer: return container.has_value();
    case Field::kCanonicalUri: return canonical_uri.has_value();
  }
  return false;
}

bool FieldValues::empty() const {
  for (Field f : kAllFields) {
    if (has(f)) return false;
  }
  return true;
}

void FieldValues::clear(Field field) {
  switch (field) {
    case Field::kTitle: title.reset(); break;
    case Field::kAuthors: authors.clear(); break;
    case Field::kIssued: issued.reset(); break;
    case Field::kContainer: container.reset(); break;
    case Field::kCanonicalUri: canonical_uri.reset(); break;
  }
}

std::string_view to_string(ArchiveService service) {
  switch (service) {
    case ArchiveService::kInternetArchive: return "internet_archive";
    case ArchiveService::kUkWebArchive: return "uk_web_archive";
    case ArchiveService::kWebCite: return "webcite";
  }
  return "unknown";
}

std::optional<ArchiveService> archive_service_from_string(std::string_view name) {
  if (name == "internet_archive") return ArchiveService::kInternetArchive;
  if (name == "uk_web_archive") return ArchiveService::kUkWebArchive;
  if (name == "webcite") return ArchiveService::kWebCite;
  return std::nullopt;
}

bool BibRecord::has(Field field) const {
  switch (field) {
    case Field::kTitle: return title.has_value();
    case Field::kAuthors: return !authors.empty();
    case Field::kIssued: return issued.has_value();
    case Field::kContainer: return container.has_value();
    case Field::kCanonicalUri: return canonical_uri.has_value();
  }
  return false;
}

bool BibRecord::same_content(const BibRecord& other) const {
  BibRecord a = *this;
  BibRecord b = other;
  a.retrieved_at = b.retrieved_at = Timestamp{};
  return a == b;
}

std::string_view to_string(Completeness c) {
  switch (c) {
    case Completeness::kNone: return "NONE";
    case Completeness::kPartial: return "PARTIAL";
    case Completeness::kTcda: return "TCDA";
    case Completeness::kTcdai: return "TCDAI";
  }
  return "NONE";
}

Completeness classify(const BibRecord& r) {
  int present = r.has(Field::kTitle) + r.has(Field::kContainer) + r.has(Field::kIssued) +
                r.has(Field::kAuthors);
  if (present == 4) return r.has(Field::kCanonicalUri) ? Completeness::kTcdai : Completeness::kTcda;
  return present > 0 ? Completeness::kPartial : Completeness::kNone;
}

}  // namespace greyharvest
