#include "greyharvest/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "greyharvest/config.hpp"
#include "greyharvest/continuity.hpp"
#include "greyharvest/embedder.hpp"
#include "greyharvest/error.hpp"
#include "greyharvest/fetcher.hpp"
#include "greyharvest/json_codec.hpp"
#include "greyharvest/resolver.hpp"
#include "greyharvest/serializers.hpp"
#include "greyharvest/service.hpp"
#include "greyharvest/site_rules.hpp"
#include "greyharvest/store.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest::cli {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

void report(std::ostream& err, std::string_view error, std::string_view detail) {
  json::Json j;
  j["error"] = error;
  j["detail"] = text::sanitize_utf8(detail);
  err << j.dump() << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json::Json read_json_file(const std::string& path) {
  auto j = json::Json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + " is not valid JSON");
  return j;
}

/// "URI=FILE" pairs become documents in an in-memory source.
void add_attachments(MapSource& source, const std::vector<std::string>& attachments) {
  for (const auto& a : attachments) {
    // The URI may itself contain '=', the file name is after the last one.
    auto eq = a.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == a.size()) {
      throw ConfigError("--attach expects URI=FILE, got '" + a + "'");
    }
    source.add(normalize_uri(a.substr(0, eq)), read_file(a.substr(eq + 1)));
  }
}

ResolverOptions make_options(const std::string& rules_dir, const std::string& config_path) {
  ResolverOptions options;
  if (!config_path.empty()) options.table = ServiceConfig::load(config_path).scoring;
  if (!rules_dir.empty()) options.rules = load_site_rules(rules_dir);
  return options;
}

std::string offline_uri(const std::string& file) {
  std::string name = std::filesystem::path(file).filename().string();
  return "http://offline.invalid/" + percent_encode(name);
}

/// Maps exceptions onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    report(err, "config", e.what());
    return kUsage;
  } catch (const MalformedUri& e) {
    report(err, "malformed_uri", e.what());
    return kUsage;
  } catch (const UnsupportedScheme& e) {
    report(err, "unsupported_scheme", e.what());
    return kUsage;
  } catch (const FetchError& e) {
    report(err, "fetch_failed", e.what());
    return kIoError;
  } catch (const StorageError& e) {
    report(err, "io", e.what());
    return kIoError;
  } catch (const MissingTitle& e) {
    report(err, "missing_title", e.what());
    return kClassNone;
  } catch (const std::exception& e) {
    report(err, "internal", e.what());
    return kIoError;
  }
}

std::string tsv_cell(std::string_view s) {
  std::string out;
  for (char c : s) out += (c == '\t' || c == '\n' || c == '\r') ? ' ' : c;
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"greyharvest: bibliographic metadata for arbitrary URIs"};
  app.set_version_flag("--version", std::string(GREYHARVEST_VERSION));
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  // cite
  auto* cite = app.add_subcommand("cite", "Resolve one URI and print its citation");
  std::string cite_uri, cite_format = "json", cite_offline, cite_as_uri, cite_rules, cite_config;
  std::vector<std::string> cite_attach;
  cite->add_option("uri", cite_uri, "URI to resolve (optional with --offline)");
  cite->add_option("-f,--format", cite_format, "json|bibtex|ris|rdf|wiki, or record for the internal JSON");
  cite->add_option("--offline", cite_offline, "Extract from a local file instead of fetching");
  cite->add_option("--as-uri", cite_as_uri, "Pretend URI for the --offline document");
  cite->add_option("--attach", cite_attach, "URI=FILE documents served to secondary fetches");
  cite->add_option("--rules-dir", cite_rules, "Directory of site rule files");
  cite->add_option("--config", cite_config, "Configuration file (scoring section is used)");

  // batch
  auto* batch = app.add_subcommand("batch", "Resolve a list of URIs and write a TSV report");
  std::string batch_list, batch_report, batch_rules, batch_config, batch_data;
  std::vector<std::string> batch_attach;
  int jobs = 4;
  batch->add_option("uri-list", batch_list, "File with one URI per line")->required();
  batch->add_option("--report", batch_report, "TSV report path")->required();
  batch->add_option("-j,--jobs", jobs, "Concurrent resolves")->check(CLI::Range(1, 256));
  batch->add_option("--rules-dir", batch_rules, "Directory of site rule files");
  batch->add_option("--config", batch_config, "Configuration file (scoring section is used)");
  batch->add_option("--data-dir", batch_data, "Store results in this data directory");
  batch->add_option("--attach", batch_attach, "URI=FILE documents; when given nothing is fetched");

  // embed
  auto* embed = app.add_subcommand("embed", "Emit self-describing HTML markup for a record");
  std::string embed_record, embed_override, embed_formats = "scholar,ogp,coins";
  embed->add_option("--record", embed_record, "Record JSON file")->required();
  embed->add_option("--override", embed_override, "Override JSON file {authors, container}");
  embed->add_option("--formats", embed_formats, "Comma-separated subset of scholar,ogp,coins");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string serve_config, serve_host, serve_data, serve_rules;
  int serve_port = -1, refresh_hours = -1;
  serve->add_option("--config", serve_config, "Configuration file");
  serve->add_option("--host", serve_host, "Listen address");
  serve->add_option("--port", serve_port, "Listen port (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--data-dir", serve_data, "Data directory (GREYHARVEST_DATA overrides)");
  serve->add_option("--rules-dir", serve_rules, "Directory of site rule files");
  serve->add_option("--refresh-hours", refresh_hours, "Cache refresh window")->check(CLI::NonNegativeNumber);

  // purl
  auto* purl = app.add_subcommand("purl", "Allocate and print the PURL of a stored record");
  std::string purl_uri, purl_data;
  purl->add_option("uri", purl_uri, "Stored URI")->required();
  purl->add_option("--data-dir", purl_data, "Data directory (GREYHARVEST_DATA overrides)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    out << (e.get_name() == "CallForVersion" ? std::string(GREYHARVEST_VERSION) + "\n" : app.help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    report(err, "usage", e.what());
    return kUsage;
  }

  auto logger = spdlog::stderr_color_mt("greyharvest-cli-" + std::to_string(reinterpret_cast<std::uintptr_t>(&app)));
  logger->set_level(spdlog::level::from_str(log_level));
  // Restores the caller's default logger, so embedding run() leaves no trace.
  struct RestoreLogger {
    std::shared_ptr<spdlog::logger> previous;
    std::string name;
    ~RestoreLogger() {
      spdlog::set_default_logger(previous);
      spdlog::drop(name);
    }
  } restore_logger{spdlog::default_logger(), logger->name()};
  spdlog::set_default_logger(logger);

  if (*cite) {
    return guarded(err, [&] {
      bool raw_record = cite_format == "record";
      auto format = raw_record ? std::optional<Format>(Format::kCiteproc) : format_from_string(cite_format);
      if (!format) throw ConfigError("unknown format '" + cite_format + "'");
      ResolverOptions options = make_options(cite_rules, cite_config);
      MapSource attached;
      add_attachments(attached, cite_attach);
      ResolveTrace trace;
      if (!cite_offline.empty()) {
        std::string uri = !cite_as_uri.empty() ? cite_as_uri : !cite_uri.empty() ? cite_uri : offline_uri(cite_offline);
        Resolver resolver(attached, options);
        trace = resolver.resolve_document(make_document(normalize_uri(uri), read_file(cite_offline), {}, system_now()));
      } else {
        if (cite_uri.empty()) throw ConfigError("cite needs a URI or --offline FILE");
        if (!cite_attach.empty()) {
          Resolver resolver(attached, options);
          trace = resolver.resolve_traced(cite_uri);
        } else {
          Fetcher fetcher;
          Resolver resolver(fetcher, options);
          trace = resolver.resolve_traced(cite_uri);
        }
      }
      for (const auto& w : trace.warnings) spdlog::info("{}", w);
      if (raw_record) {
        out << json::encode(trace.record).dump();
      } else {
        out << serialize(trace.record, *format);
      }
      bool ends_with_newline = *format == Format::kBibtex || *format == Format::kRis || *format == Format::kTurtle;
      if (raw_record || !ends_with_newline) out << '\n';
      if (classify(trace.record) == Completeness::kNone) {
        report(err, "class_none", "no title, container, date or author found");
        return static_cast<int>(kClassNone);
      }
      return static_cast<int>(kOk);
    });
  }

  if (*batch) {
    return guarded(err, [&] {
      ResolverOptions options = make_options(batch_rules, batch_config);
      std::vector<std::string> uris;
      {
        std::istringstream lines(read_file(batch_list));
        std::string line;
        while (std::getline(lines, line)) {
          std::string t(text::trim(line));
          if (!t.empty() && t[0] != '#') uris.push_back(t);
        }
      }
      std::unique_ptr<Store> store;
      if (!batch_data.empty()) store = std::make_unique<Store>(batch_data);
      std::unique_ptr<DocumentSource> source;
      if (!batch_attach.empty()) {
        auto map = std::make_unique<MapSource>();
        add_attachments(*map, batch_attach);
        source = std::move(map);
      } else {
        source = std::make_unique<Fetcher>();
      }
      Resolver resolver(*source, options, store.get());

      std::vector<std::string> rows(uris.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < uris.size(); i = next++) {
          std::string row = tsv_cell(uris[i]);
          try {
            BibRecord r = resolver.resolve(uris[i]);
            row += '\t';
            row += to_string(classify(r));
            for (Field f : kAllFields) {
              auto it = r.provenance.find(f);
              row += '\t';
              row += it == r.provenance.end() ? std::string("-") : std::string(to_string(it->second));
            }
          } catch (const std::exception& e) {
            row += "\tERROR\t-\t-\t-\t-\t-";
            report(err, "resolve_failed", uris[i] + ": " + e.what());
          }
          rows[i] = std::move(row);
        }
      };
      std::vector<std::thread> threads;
      for (int t = 0; t < std::min<int>(jobs, std::max<std::size_t>(1, uris.size())); ++t) threads.emplace_back(worker);
      for (auto& t : threads) t.join();

      std::ofstream report_file(batch_report, std::ios::binary | std::ios::trunc);
      if (!report_file) throw StorageError("cannot write " + batch_report);
      report_file << "uri\tclass\ttitle\tauthors\tissued\tcontainer\tcanonical_uri\n";
      for (const auto& row : rows) report_file << row << '\n';
      if (!report_file.flush()) throw StorageError("cannot write " + batch_report);
      return static_cast<int>(kOk);
    });
  }

  if (*embed) {
    return guarded(err, [&] {
      json::Json record_json = read_json_file(embed_record);
      BibRecord record;
      try {
        record = json::decode_record(record_json);
      } catch (const std::exception& e) {
        throw ConfigError(embed_record + " is not a record: " + e.what());
      }
      RecordOverride override_fields;
      if (!embed_override.empty()) {
        json::Json o = read_json_file(embed_override);
        if (!o.is_object()) throw ConfigError("override must be a JSON object");
        if (o.contains("authors")) {
          if (!o["authors"].is_array() || o["authors"].empty()) {
            throw ConfigError("override authors must be a non-empty array");
          }
          std::vector<Person> authors;
          for (const auto& a : o["authors"]) {
            authors.push_back(a.is_string() ? Person::from_literal(a.get<std::string>()) : json::decode_person(a));
          }
          override_fields.authors = std::move(authors);
        }
        if (o.contains("container")) {
          if (!o["container"].is_string()) throw ConfigError("override container must be a string");
          override_fields.container = o["container"].get<std::string>();
        }
      }
      Markup m = emit_markup(record, override_fields, EmbedFormats::parse(embed_formats));
      out << m.head_html;
      if (!m.body_html.empty()) out << m.body_html;
      return static_cast<int>(kOk);
    });
  }

  if (*serve) {
    return guarded(err, [&] {
      ServiceConfig config = serve_config.empty() ? ServiceConfig{} : ServiceConfig::load(serve_config);
      if (!serve_host.empty()) config.host = serve_host;
      if (serve_port >= 0) config.port = serve_port;
      if (!serve_data.empty()) config.data_dir = serve_data;
      if (!serve_rules.empty()) config.rules_dir = serve_rules;
      if (refresh_hours >= 0) config.refresh_window = std::chrono::hours(refresh_hours);
      config.apply_environment();
      Service service(config);
      int port = service.start();
      // The bound port is the one artifact a caller may need (port 0).
      out << port << std::endl;
      g_stop = false;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      service.stop();
      return static_cast<int>(kOk);
    });
  }

  if (*purl) {
    return guarded(err, [&] {
      ServiceConfig config;
      if (!purl_data.empty()) config.data_dir = purl_data;
      config.apply_environment();
      Store store(config.data_dir);
      std::string uri = normalize_uri(purl_uri);
      auto record = store.get_latest(uri);
      if (!record) throw StorageError("no stored record for " + uri);
      MapSource nothing;
      Continuity continuity(store, nothing);
      auto p = continuity.allocate_purl(uri, *record);
      if (!p) {
        report(err, "below_threshold", uri + " is " + std::string(to_string(classify(*record))) +
                                           "; PURLs need title, container, date and author");
        return static_cast<int>(kClassNone);
      }
      out << p->id << '\t' << p->target_uri << '\n';
      return static_cast<int>(kOk);
    });
  }
  return kUsage;
}

}  // namespace greyharvest::cli
