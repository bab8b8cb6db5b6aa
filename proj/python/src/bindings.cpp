// Records cross the boundary as JSON text; the Python package turns them
// into dicts so callers never see C++ types.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "greyharvest/continuity.hpp"
#include "greyharvest/embedder.hpp"
#include "greyharvest/error.hpp"
#include "greyharvest/fetcher.hpp"
#include "greyharvest/json_codec.hpp"
#include "greyharvest/resolver.hpp"
#include "greyharvest/serializers.hpp"
#include "greyharvest/site_rules.hpp"
#include "greyharvest/uri.hpp"

namespace py = pybind11;
using namespace greyharvest;

namespace {

BibRecord parse_record(const std::string& record_json) {
  auto j = json::Json::parse(record_json, nullptr, false);
  if (j.is_discarded()) throw ConfigError("record is not valid JSON");
  return json::decode_record(j);
}

ResolverOptions options_for(const std::optional<std::string>& rules_dir) {
  ResolverOptions options;
  if (rules_dir) options.rules = load_site_rules(*rules_dir);
  return options;
}

py::tuple trace_result(const ResolveTrace& trace) {
  return py::make_tuple(json::encode(trace.record).dump(), trace.warnings);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "greyharvest native core";
  m.attr("__version__") = GREYHARVEST_VERSION;

  static py::exception<Error> base(m, "GreyharvestError");
  static py::exception<MalformedUri> malformed(m, "MalformedUri", base.ptr());
  static py::exception<FetchError> fetch(m, "FetchError", base.ptr());
  static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
  static py::exception<MissingTitle> missing_title(m, "MissingTitle", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const MalformedUri& e) {
      py::set_error(malformed, e.what());
    } catch (const FetchError& e) {
      py::set_error(fetch, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    } catch (const MissingTitle& e) {
      py::set_error(missing_title, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("normalize_uri", [](const std::string& uri) { return normalize_uri(uri); }, py::arg("uri"));

  m.def(
      "resolve_html",
      [](const std::string& uri, const std::string& body, const std::map<std::string, std::string>& attachments,
         const std::optional<std::string>& rules_dir) {
        MapSource source;
        for (const auto& [u, content] : attachments) source.add(normalize_uri(u), content);
        Resolver resolver(source, options_for(rules_dir));
        return trace_result(resolver.resolve_document(make_document(normalize_uri(uri), body, {}, system_now())));
      },
      py::arg("uri"), py::arg("body"), py::arg("attachments") = std::map<std::string, std::string>{},
      py::arg("rules_dir") = std::nullopt);

  m.def(
      "resolve",
      [](const std::string& uri, const std::optional<std::string>& rules_dir) {
        ResolverOptions options = options_for(rules_dir);
        py::gil_scoped_release release;
        Fetcher fetcher;
        Resolver resolver(fetcher, options);
        return std::make_pair(json::encode(resolver.resolve_traced(uri).record).dump(), std::vector<std::string>{});
      },
      py::arg("uri"), py::arg("rules_dir") = std::nullopt);

  m.def(
      "serialize",
      [](const std::string& record_json, const std::string& format) {
        auto f = format_from_string(format);
        if (!f) throw ConfigError("unknown format '" + format + "'");
        return serialize(parse_record(record_json), *f);
      },
      py::arg("record"), py::arg("format"));

  m.def("classify", [](const std::string& record_json) { return std::string(to_string(classify(parse_record(record_json)))); },
        py::arg("record"));

  m.def(
      "embed",
      [](const std::string& record_json, const std::string& formats) {
        Markup markup = emit_markup(parse_record(record_json), {}, EmbedFormats::parse(formats));
        return std::make_pair(markup.head_html, markup.body_html);
      },
      py::arg("record"), py::arg("formats") = "scholar,ogp,coins");

  m.def("purl_id", [](const std::string& uri) { return purl_id_for(normalize_uri(uri)); }, py::arg("uri"));
  m.def("bibtex_key", [](const std::string& uri) { return bibtex_key(uri); }, py::arg("uri"));
}
