#pragma once

// Bibliographic data model shared by every module.

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace greyharvest {

using Timestamp = std::chrono::sys_seconds;
using Clock = std::function<Timestamp()>;

Timestamp system_now();
std::string format_timestamp(Timestamp t);               // 2012-04-01T10:00:00Z
std::optional<Timestamp> parse_timestamp(std::string_view text);
Timestamp make_timestamp(int year, int month, int day, int hour = 0, int minute = 0, int second = 0);

/// A publication date that may be known only to the year or month.
struct PartialDate {
  int year = 0;
  std::optional<int> month;
  std::optional<int> day;

  /// Returns nullopt unless the parts form a valid (partial) calendar date
  /// with year in [min_year, 9999].
  static std::optional<PartialDate> make(int year, std::optional<int> month = std::nullopt,
                                         std::optional<int> day = std::nullopt, int min_year = 1000);

  /// YYYY, YYYY-MM or YYYY-MM-DD depending on precision.
  std::string iso() const;

  friend bool operator==(const PartialDate&, const PartialDate&) = default;
};

int days_in_month(int year, int month);

/// An author as found in the source. family/given are filled by a split
/// heuristic; literal is always the trimmed text as found.
struct Person {
  std::string literal;
  std::optional<std::string> family;
  std::optional<std::string> given;

  /// "Family, Given" splits on the first comma; otherwise two or more
  /// whitespace-separated tokens split on the last whitespace.
  static Person from_literal(std::string_view text);

  friend bool operator==(const Person&, const Person&) = default;
};

enum class Field : std::uint8_t { kTitle, kAuthors, kIssued, kContainer, kCanonicalUri };

inline constexpr std::array<Field, 5> kAllFields = {Field::kTitle, Field::kAuthors, Field::kIssued,
                                                    Field::kContainer, Field::kCanonicalUri};

std::string_view to_string(Field field);
std::optional<Field> field_from_string(std::string_view name);

// Declaration order is the merge tie-break order: earlier wins on equal weight.
enum class SourceKind : std::uint8_t {
  kGoogleScholar,
  kEprints,
  kDublinCore,
  kCoins,
  kOgp,
  kW3c,
  kCeurWs,
  kScienceDirect,
  kWorldCat,
  kOrcid,
  kOpenLibrary,
  kMendeley,
  kSiteRule,
  kRss,
  kAtom,
  kPrism,
  kSchemaOrg,
  kMeta,
  kPdf,
  kTwitter,
  kHtmlTitle,
  kFeedInference,
  kUriDate,
};

inline constexpr std::size_t kSourceKindCount = 23;

std::string_view to_string(SourceKind kind);
std::optional<SourceKind> source_kind_from_string(std::string_view name);
std::vector<SourceKind> all_source_kinds();

/// Field letters a source may ever emit (T, C, D, A, I).
std::string_view granted_letters(SourceKind kind);
bool grants(SourceKind kind, Field field);
char field_letter(Field field);

/// Sparse set of bibliographic claims. An empty author list means "absent".
struct FieldValues {
  std::optional<std::string> title;
  std::vector<Person> authors;
  std::optional<PartialDate> issued;
  std::optional<std::string> container;
  std::optional<std::string> canonical_uri;

  bool has(Field field) const;
  bool empty() const;
  void clear(Field field);

  friend bool operator==(const FieldValues&, const FieldValues&) = default;
};

/// One extractor's claim about one document.
struct MetadataFragment {
  SourceKind source = SourceKind::kHtmlTitle;
  FieldValues fields;
  int score = 0;
  Timestamp observed_at{};

  friend bool operator==(const MetadataFragment&, const MetadataFragment&) = default;
};

enum class ArchiveService : std::uint8_t { kInternetArchive, kUkWebArchive, kWebCite };

std::string_view to_string(ArchiveService service);
std::optional<ArchiveService> archive_service_from_string(std::string_view name);

struct ArchiveSnapshot {
  ArchiveService service = ArchiveService::kInternetArchive;
  std::string snapshot_uri;
  Timestamp snapshot_time{};

  friend bool operator==(const ArchiveSnapshot&, const ArchiveSnapshot&) = default;
};

struct BibRecord {
  std::string uri;
  std::optional<std::string> canonical_uri;
  std::optional<std::string> title;
  std::vector<Person> authors;
  std::optional<PartialDate> issued;
  std::optional<std::string> container;
  std::vector<ArchiveSnapshot> archives;
  std::map<Field, SourceKind> provenance;
  Timestamp retrieved_at{};

  bool has(Field field) const;

  /// Equality on everything except retrieved_at.
  bool same_content(const BibRecord& other) const;

  friend bool operator==(const BibRecord&, const BibRecord&) = default;
};

enum class Completeness : std::uint8_t { kNone, kPartial, kTcda, kTcdai };

std::string_view to_string(Completeness c);
Completeness classify(const BibRecord& record);

/// An observed canonical state of a URI over [first_observed, last_observed].
struct CanonicalEvent {
  std::string uri;
  std::optional<std::string> canonical_uri;
  bool was_canonical = true;
  Timestamp first_observed{};
  Timestamp last_observed{};

  friend bool operator==(const CanonicalEvent&, const CanonicalEvent&) = default;
};

struct Purl {
  std::string id;
  std::string target_uri;
  Timestamp created_at{};

  friend bool operator==(const Purl&, const Purl&) = default;
};

}  // namespace greyharvest
