#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "greyharvest/model.hpp"

namespace greyharvest {

enum class Format : std::uint8_t { kCiteproc, kBibtex, kRis, kTurtle, kWiki };

std::optional<Format> format_from_string(std::string_view name);  // json|bibtex|ris|rdf|wiki
std::string_view content_type(Format format);

std::string to_citeproc(const BibRecord& record);
std::string to_bibtex(const BibRecord& record);
std::string to_ris(const BibRecord& record);
std::string to_dc_rdf(const BibRecord& record);
std::string to_wiki_cite(const BibRecord& record);
std::string serialize(const BibRecord& record, Format format);

/// <host>_<first 8 hex digits of sha256(uri)>; host characters outside
/// [a-z0-9.-] become '_'.
std::string bibtex_key(std::string_view uri);

std::string bibtex_escape(std::string_view text);

}  // namespace greyharvest
