#include "greyharvest/json_codec.hpp"

#include "greyharvest/dates.hpp"
#include "greyharvest/error.hpp"

namespace greyharvest::json {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(std::string("missing key in json: ") + key);
  }
  return j.at(key);
}

std::string require_string(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_string()) throw Error(std::string("expected string for key: ") + key);
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw Error(std::string("expected string for key: ") + key);
  return j.at(key).get<std::string>();
}

Timestamp require_timestamp(const Json& j, const char* key) {
  auto t = parse_timestamp(require_string(j, key));
  if (!t) throw Error(std::string("bad timestamp for key: ") + key);
  return *t;
}

Timestamp optional_timestamp(const Json& j, const char* key) {
  if (!j.contains(key)) return Timestamp{};
  return require_timestamp(j, key);
}

std::optional<PartialDate> decode_date(const Json& j, const char* key) {
  auto text = optional_string(j, key);
  if (!text) return std::nullopt;
  auto date = parse_date(*text);
  if (!date) throw Error("bad date: " + *text);
  return date;
}

std::vector<Person> decode_people(const Json& j, const char* key) {
  std::vector<Person> people;
  if (!j.contains(key)) return people;
  const Json& list = j.at(key);
  if (!list.is_array()) throw Error(std::string("expected array for key: ") + key);
  for (const auto& p : list) people.push_back(decode_person(p));
  return people;
}

void put_optional(Json& j, const char* key, const std::optional<std::string>& v) {
  if (v) j[key] = *v;
}

}  // namespace

Json encode(const Person& person) {
  Json j = Json::object();
  j["literal"] = person.literal;
  put_optional(j, "family", person.family);
  put_optional(j, "given", person.given);
  return j;
}

Person decode_person(const Json& j) {
  if (j.is_string()) return Person::from_literal(j.get<std::string>());
  Person p;
  p.literal = require_string(j, "literal");
  p.family = optional_string(j, "family");
  p.given = optional_string(j, "given");
  if (!j.contains("family") && !j.contains("given")) p = Person::from_literal(p.literal);
  return p;
}

Json encode(const FieldValues& f) {
  Json j = Json::object();
  put_optional(j, "title", f.title);
  if (!f.authors.empty()) {
    Json authors = Json::array();
    for (const auto& p : f.authors) authors.push_back(encode(p));
    j["authors"] = std::move(authors);
  }
  if (f.issued) j["issued"] = f.issued->iso();
  put_optional(j, "container", f.container);
  put_optional(j, "canonical_uri", f.canonical_uri);
  return j;
}

FieldValues decode_fields(const Json& j) {
  FieldValues f;
  f.title = optional_string(j, "title");
  f.authors = decode_people(j, "authors");
  f.issued = decode_date(j, "issued");
  f.container = optional_string(j, "container");
  f.canonical_uri = optional_string(j, "canonical_uri");
  return f;
}

Json encode(const MetadataFragment& fragment) {
  Json j = Json::object();
  j["source"] = std::string(to_string(fragment.source));
  j["fields"] = encode(fragment.fields);
  j["score"] = fragment.score;
  j["observed_at"] = format_timestamp(fragment.observed_at);
  return j;
}

MetadataFragment decode_fragment(const Json& j) {
  MetadataFragment f;
  auto source = source_kind_from_string(require_string(j, "source"));
  if (!source) throw Error("unknown source kind");
  f.source = *source;
  f.fields = decode_fields(require(j, "fields"));
  f.score = j.value("score", 0);
  f.observed_at = optional_timestamp(j, "observed_at");
  return f;
}

Json encode(const ArchiveSnapshot& s) {
  Json j = Json::object();
  j["service"] = std::string(to_string(s.service));
  j["snapshot_uri"] = s.snapshot_uri;
  j["snapshot_time"] = format_timestamp(s.snapshot_time);
  return j;
}

ArchiveSnapshot decode_snapshot(const Json& j) {
  ArchiveSnapshot s;
  auto service = archive_service_from_string(require_string(j, "service"));
  if (!service) throw Error("unknown archive service");
  s.service = *service;
  s.snapshot_uri = require_string(j, "snapshot_uri");
  s.snapshot_time = require_timestamp(j, "snapshot_time");
  return s;
}

Json encode(const BibRecord& r) {
  Json j = Json::object();
  j["uri"] = r.uri;
  put_optional(j, "canonical_uri", r.canonical_uri);
  put_optional(j, "title", r.title);
  if (!r.authors.empty()) {
    Json authors = Json::array();
    for (const auto& p : r.authors) authors.push_back(encode(p));
    j["authors"] = std::move(authors);
  }
  if (r.issued) j["issued"] = r.issued->iso();
  put_optional(j, "container", r.container);
  if (!r.archives.empty()) {
    Json archives = Json::array();
    for (const auto& a : r.archives) archives.push_back(encode(a));
    j["archives"] = std::move(archives);
  }
  if (!r.provenance.empty()) {
    Json prov = Json::object();
    for (const auto& [field, source] : r.provenance) {
      prov[std::string(to_string(field))] = std::string(to_string(source));
    }
    j["provenance"] = std::move(prov);
  }
  j["retrieved_at"] = format_timestamp(r.retrieved_at);
  return j;
}

BibRecord decode_record(const Json& j) {
  BibRecord r;
  r.uri = require_string(j, "uri");
  r.canonical_uri = optional_string(j, "canonical_uri");
  r.title = optional_string(j, "title");
  r.authors = decode_people(j, "authors");
  r.issued = decode_date(j, "issued");
  r.container = optional_string(j, "container");
  if (j.contains("archives")) {
    for (const auto& a : j.at("archives")) r.archives.push_back(decode_snapshot(a));
  }
  if (j.contains("provenance")) {
    for (const auto& [key, value] : j.at("provenance").items()) {
      auto field = field_from_string(key);
      auto source = value.is_string() ? source_kind_from_string(value.get<std::string>())
                                      : std::nullopt;
      if (!field || !source) throw Error("bad provenance entry: " + key);
      r.provenance[*field] = *source;
    }
  }
  r.retrieved_at = optional_timestamp(j, "retrieved_at");
  return r;
}

Json encode(const CanonicalEvent& e) {
  Json j = Json::object();
  j["uri"] = e.uri;
  put_optional(j, "canonical_uri", e.canonical_uri);
  j["was_canonical"] = e.was_canonical;
  j["first_observed"] = format_timestamp(e.first_observed);
  j["last_observed"] = format_timestamp(e.last_observed);
  return j;
}

CanonicalEvent decode_event(const Json& j) {
  CanonicalEvent e;
  e.uri = require_string(j, "uri");
  e.canonical_uri = optional_string(j, "canonical_uri");
  e.was_canonical = require(j, "was_canonical").get<bool>();
  e.first_observed = require_timestamp(j, "first_observed");
  e.last_observed = require_timestamp(j, "last_observed");
  return e;
}

Json encode(const Purl& p) {
  Json j = Json::object();
  j["id"] = p.id;
  j["target_uri"] = p.target_uri;
  j["created_at"] = format_timestamp(p.created_at);
  return j;
}

Purl decode_purl(const Json& j) {
  return Purl{require_string(j, "id"), require_string(j, "target_uri"),
              require_timestamp(j, "created_at")};
}

}  // namespace greyharvest::json
