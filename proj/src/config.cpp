#include "greyharvest/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "greyharvest/error.hpp"

namespace greyharvest {

namespace {

template <typename T>
T get_as(const json::Json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::Json::exception&) {
    throw ConfigError(std::string("config: '") + key + "' must be " + what);
  }
}

long long get_nonnegative(const json::Json& j, const char* key) {
  if (!j.at(key).is_number_integer()) {
    throw ConfigError(std::string("config: '") + key + "' must be a non-negative integer");
  }
  auto v = get_as<long long>(j, key, "a non-negative integer");
  if (v < 0) throw ConfigError(std::string("config: '") + key + "' must be non-negative");
  return v;
}

ArchiveEndpoint parse_endpoint(const json::Json& j) {
  if (!j.is_object()) throw ConfigError("config: archive entries must be objects");
  auto name = get_as<std::string>(j, "service", "a string");
  auto service = archive_service_from_string(name);
  if (!service) throw ConfigError("config: unknown archive service '" + name + "'");
  ArchiveEndpoint e = *service == ArchiveService::kInternetArchive ? ArchiveEndpoint::internet_archive()
                                                                   : ArchiveEndpoint{};
  e.service = *service;
  if (j.contains("url_template")) e.url_template = get_as<std::string>(j, "url_template", "a string");
  if (e.url_template.find("{uri}") == std::string::npos) {
    throw ConfigError("config: archive url_template for " + name + " lacks {uri}");
  }
  for (const char* key : {"snapshot_pointer", "timestamp_pointer", "available_pointer"}) {
    if (!j.contains(key)) continue;
    std::string value = get_as<std::string>(j, key, "a JSON pointer string");
    if (key == std::string_view("snapshot_pointer")) e.snapshot_pointer = value;
    else if (key == std::string_view("timestamp_pointer")) e.timestamp_pointer = value;
    else e.available_pointer = value;
  }
  if (j.contains("domains")) e.domains = get_as<std::vector<std::string>>(j, "domains", "a string array");
  if (e.domains.empty()) throw ConfigError("config: archive " + name + " needs a domain set");
  return e;
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const json::Json& j, ServiceConfig c) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  if (j.contains("host")) c.host = get_as<std::string>(j, "host", "a string");
  if (j.contains("port")) {
    auto port = get_nonnegative(j, "port");
    if (port > 65535) throw ConfigError("config: port out of range");
    c.port = static_cast<int>(port);
  }
  if (j.contains("data_dir")) c.data_dir = get_as<std::string>(j, "data_dir", "a string");
  if (j.contains("rules_dir")) c.rules_dir = get_as<std::string>(j, "rules_dir", "a string");
  if (j.contains("refresh_hours")) c.refresh_window = std::chrono::hours(get_nonnegative(j, "refresh_hours"));
  if (j.contains("resolve_timeout_ms")) {
    c.resolve_timeout = std::chrono::milliseconds(get_nonnegative(j, "resolve_timeout_ms"));
  }
  if (j.contains("threads")) c.threads = std::max(1, static_cast<int>(get_nonnegative(j, "threads")));
  if (j.contains("periodic_interval_minutes")) {
    c.periodic_interval = std::chrono::minutes(get_nonnegative(j, "periodic_interval_minutes"));
  }
  if (j.contains("recheck_days")) {
    c.continuity.recheck_interval = std::chrono::hours(24 * get_nonnegative(j, "recheck_days"));
  }
  if (j.contains("fetch")) {
    const auto& f = j.at("fetch");
    if (!f.is_object()) throw ConfigError("config: 'fetch' must be an object");
    if (f.contains("timeout_ms")) c.fetch.timeout = std::chrono::milliseconds(get_nonnegative(f, "timeout_ms"));
    if (f.contains("max_redirects")) c.fetch.max_redirects = static_cast<int>(get_nonnegative(f, "max_redirects"));
    if (f.contains("max_body_bytes")) c.fetch.max_body_bytes = get_nonnegative(f, "max_body_bytes");
    if (f.contains("host_interval_ms")) c.host_interval = std::chrono::milliseconds(get_nonnegative(f, "host_interval_ms"));
    if (f.contains("user_agent")) c.fetch.user_agent = get_as<std::string>(f, "user_agent", "a string");
    if (f.contains("background_respects_robots")) {
      c.background_respects_robots = get_as<bool>(f, "background_respects_robots", "a boolean");
    }
  }
  if (j.contains("archives")) {
    const auto& a = j.at("archives");
    if (!a.is_array()) throw ConfigError("config: 'archives' must be an array");
    c.continuity.archives.clear();
    for (const auto& e : a) c.continuity.archives.push_back(parse_endpoint(e));
  }
  if (j.contains("submission_url_template")) {
    auto t = get_as<std::string>(j, "submission_url_template", "a string");
    if (t.find("{uri}") == std::string::npos) throw ConfigError("config: submission_url_template lacks {uri}");
    c.continuity.submission_template = t;
  }
  if (j.contains("scoring")) c.scoring = ScoreTable::from_json(j.at("scoring"), c.scoring);
  return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& file, ServiceConfig base) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto j = json::Json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: " + file.string() + " is not valid JSON");
  return from_json(j, std::move(base));
}

ServiceConfig ServiceConfig::from_json(const json::Json& j) { return from_json(j, ServiceConfig{}); }

ServiceConfig ServiceConfig::load(const std::filesystem::path& file) { return load(file, ServiceConfig{}); }

void ServiceConfig::apply_environment() {
  if (const char* env = std::getenv("GREYHARVEST_DATA"); env && *env) data_dir = env;
}

}  // namespace greyharvest
