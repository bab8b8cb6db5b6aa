#pragma once

// Canonical JSON encoding of the model types: fixed key order, absent
// fields omitted, dates as ISO strings. This is the on-disk value format
// of the store and the record input format of the CLI.

#include <json.hpp>

#include "greyharvest/model.hpp"

namespace greyharvest::json {

using Json = nlohmann::ordered_json;

Json encode(const Person& person);
Json encode(const FieldValues& fields);
Json encode(const MetadataFragment& fragment);
Json encode(const ArchiveSnapshot& snapshot);
Json encode(const BibRecord& record);
Json encode(const CanonicalEvent& event);
Json encode(const Purl& purl);

// Decoders throw greyharvest::Error on shape errors.
Person decode_person(const Json& j);
FieldValues decode_fields(const Json& j);
MetadataFragment decode_fragment(const Json& j);
ArchiveSnapshot decode_snapshot(const Json& j);
BibRecord decode_record(const Json& j);
CanonicalEvent decode_event(const Json& j);
Purl decode_purl(const Json& j);

}  // namespace greyharvest::json
