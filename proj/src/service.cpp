#include "greyharvest/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>

#include "greyharvest/json_codec.hpp"
#include "greyharvest/serializers.hpp"
#include "greyharvest/site_rules.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest {

namespace {

ResolverOptions make_options(const ServiceConfig& config) {
  ResolverOptions options;
  options.table = config.scoring;
  if (config.rules_dir) options.rules = load_site_rules(*config.rules_dir);
  return options;
}

std::shared_ptr<DocumentSource> make_fetcher(const ServiceConfig& config, std::shared_ptr<HostGate> gate,
                                             bool background, const Clock& clock) {
  FetchPolicy policy = config.fetch;
  policy.respect_robots = background && config.background_respects_robots;
  return std::make_shared<Fetcher>(policy, std::move(gate), clock);
}

}  // namespace

Harvester::Harvester(ServiceConfig config, std::shared_ptr<DocumentSource> foreground,
                     std::shared_ptr<DocumentSource> background, Clock clock)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      store_(config_.data_dir, clock_),
      gate_(std::make_shared<HostGate>(config_.host_interval)),
      foreground_source_(foreground ? std::move(foreground) : make_fetcher(config_, gate_, false, clock_)),
      background_source_(background ? std::move(background) : make_fetcher(config_, gate_, true, clock_)),
      foreground_(*foreground_source_, make_options(config_), &store_, clock_),
      background_(*background_source_, foreground_.options(), &store_, clock_),
      continuity_(store_, *background_source_, config_.continuity, clock_) {}

Harvester::~Harvester() { drain(); }

void Harvester::drain() {
  while (true) {
    std::vector<std::future<void>> tasks;
    {
      std::lock_guard lock(mutex_);
      tasks.swap(tasks_);
    }
    if (tasks.empty()) return;
    for (auto& t : tasks) t.wait();
  }
}

void Harvester::spawn(std::function<void()> task) {
  std::lock_guard lock(mutex_);
  tasks_.erase(std::remove_if(tasks_.begin(), tasks_.end(),
                              [](std::future<void>& f) {
                                return f.wait_for(std::chrono::seconds(0)) == std::future_status::ready;
                              }),
               tasks_.end());
  tasks_.push_back(std::async(std::launch::async, std::move(task)));
}

BibRecord Harvester::do_resolve(const std::string& uri, bool background) {
  Resolver& resolver = background ? background_ : foreground_;
  ResolveTrace trace = resolver.resolve_traced(uri);
  for (const auto& w : trace.warnings) spdlog::info("{}: {}", uri, w);
  after_resolve(uri, trace.record);
  {
    std::lock_guard lock(mutex_);
    refreshed_at_[uri] = clock_();
  }
  auto latest = store_.get_latest(uri);
  return latest ? *latest : trace.record;
}

void Harvester::after_resolve(const std::string& uri, const BibRecord& record) {
  try {
    if (auto event = continuity_.observe_canonical(uri, record)) {
      spdlog::info("{}: canonical state {} ({})", uri, event->was_canonical ? "self" : "diverged",
                   event->canonical_uri.value_or("-"));
    }
    continuity_.allocate_purl(uri, record);
    if (continuity_.config().submission_template) continuity_.submit_for_archiving(uri, record);
  } catch (const std::exception& e) {
    spdlog::warn("{}: continuity bookkeeping failed: {}", uri, e.what());
  }
}

std::shared_future<BibRecord> Harvester::start_resolve(const std::string& uri, bool background) {
  std::lock_guard lock(mutex_);
  if (auto it = in_flight_.find(uri); it != in_flight_.end()) return it->second;
  auto promise = std::make_shared<std::promise<BibRecord>>();
  std::shared_future<BibRecord> future = promise->get_future().share();
  in_flight_[uri] = future;
  tasks_.push_back(std::async(std::launch::async, [this, uri, background, promise] {
    try {
      promise->set_value(do_resolve(uri, background));
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
    std::lock_guard guard(mutex_);
    in_flight_.erase(uri);
  }));
  return future;
}

BibRecord Harvester::refresh(const std::string& raw_uri) {
  std::string uri = normalize_uri(raw_uri);
  auto future = start_resolve(uri, false);
  if (future.wait_for(config_.resolve_timeout) != std::future_status::ready) {
    throw ResolveTimeout("resolve of " + uri + " did not finish within " +
                         std::to_string(config_.resolve_timeout.count()) + " ms");
  }
  return future.get();
}

BibRecord Harvester::lookup(const std::string& raw_uri) {
  std::string uri = normalize_uri(raw_uri);
  auto latest = store_.get_latest_version(uri);
  if (!latest) return refresh(uri);

  Timestamp now = clock_();
  Timestamp last = latest->info.stored_at;
  {
    std::lock_guard lock(mutex_);
    if (auto it = refreshed_at_.find(uri); it != refreshed_at_.end()) last = std::max(last, it->second);
  }
  if (now - last >= config_.refresh_window) {
    spdlog::info("{}: cached record is stale, refreshing in background", uri);
    auto future = start_resolve(uri, true);
    spawn([uri, future] {
      try {
        future.get();
      } catch (const std::exception& e) {
        spdlog::warn("{}: background refresh failed: {}", uri, e.what());
      }
    });
  }
  return latest->record;
}

std::vector<ArchiveSnapshot> Harvester::archives(const std::string& raw_uri) {
  std::string uri = normalize_uri(raw_uri);
  lookup(uri);
  ArchiveState state = store_.get_archives(uri);
  if (!state.checked_at) return continuity_.check_archives(uri);
  return state.snapshots;
}

std::optional<Purl> Harvester::purl_for(const std::string& raw_uri) {
  std::string uri = normalize_uri(raw_uri);
  if (auto existing = store_.get_purl_for_uri(uri)) return existing;
  auto record = store_.get_latest(uri);
  if (!record) return std::nullopt;
  return continuity_.allocate_purl(uri, *record);
}

// ---------------------------------------------------------------------------

namespace {

void send_error(httplib::Response& res, int status, std::string_view error, std::string_view detail) {
  json::Json body;
  body["error"] = error;
  body["detail"] = detail;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

/// Runs a handler that needs a record for the request's uri parameter and
/// maps failures onto HTTP statuses.
template <typename F>
void with_uri(const httplib::Request& req, httplib::Response& res, F&& body) {
  if (!req.has_param("uri") || req.get_param_value("uri").empty()) {
    send_error(res, 400, "missing_uri", "the uri query parameter is required");
    return;
  }
  std::string uri;
  try {
    uri = normalize_uri(req.get_param_value("uri"));
  } catch (const Error& e) {
    send_error(res, 400, "malformed_uri", e.what());
    return;
  }
  try {
    body(uri);
  } catch (const ResolveTimeout& e) {
    send_error(res, 504, "resolve_timeout", e.what());
  } catch (const FetchError& e) {
    send_error(res, 502, "fetch_failed", e.what());
  } catch (const Error& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

Service::Service(ServiceConfig config, std::shared_ptr<DocumentSource> foreground,
                 std::shared_ptr<DocumentSource> background, Clock clock)
    : harvester_(std::make_unique<Harvester>(std::move(config), std::move(foreground), std::move(background),
                                             std::move(clock))),
      server_(std::make_unique<httplib::Server>()) {
  int threads = harvester_->config().threads;
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  install_routes();
}

Service::~Service() {
  stop();
  harvester_->drain();
}

void Service::install_routes() {
  Harvester& h = *harvester_;
  const std::pair<const char*, Format> formats[] = {{"/api/json", Format::kCiteproc},
                                                    {"/api/bibtex", Format::kBibtex},
                                                    {"/api/ris", Format::kRis},
                                                    {"/api/rdf", Format::kTurtle},
                                                    {"/api/wiki", Format::kWiki}};
  for (const auto& [path, format] : formats) {
    Format f = format;
    server_->Get(path, [&h, f](const httplib::Request& req, httplib::Response& res) {
      with_uri(req, res, [&](const std::string& uri) {
        h.lookup(uri);
        auto record = h.store().get_latest(uri);
        if (!record) throw StorageError("no stored record for " + uri);
        res.set_content(serialize(*record, f), std::string(content_type(f)));
      });
    });
  }

  server_->Get("/api/archives", [&h](const httplib::Request& req, httplib::Response& res) {
    with_uri(req, res, [&](const std::string& uri) {
      json::Json out = json::Json::array();
      for (const auto& s : h.archives(uri)) out.push_back(json::encode(s));
      res.set_content(out.dump(), "application/json");
    });
  });

  server_->Get("/api/history", [&h](const httplib::Request& req, httplib::Response& res) {
    with_uri(req, res, [&](const std::string& uri) {
      h.lookup(uri);
      json::Json out = json::Json::array();
      for (const auto& v : h.store().get_history(uri)) {
        json::Json entry;
        entry["version"] = v.info.version;
        entry["stored_at"] = format_timestamp(v.info.stored_at);
        entry["digest"] = v.info.digest;
        entry["prev_digest"] = v.info.prev_digest;
        entry["class"] = to_string(classify(v.record));
        entry["record"] = json::encode(v.record);
        out.push_back(std::move(entry));
      }
      res.set_content(out.dump(), "application/json");
    });
  });

  server_->Get(R"(/purl/([A-Za-z0-9]+))", [&h](const httplib::Request& req, httplib::Response& res) {
    try {
      res.set_redirect(h.purl_target(req.matches[1].str()), 302);
    } catch (const UnknownPurl& e) {
      send_error(res, 404, "unknown_purl", e.what());
    }
  });

  server_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty() && res.status == 404) send_error(res, 404, "not_found", "no such endpoint");
  });
  server_->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string detail = "unknown error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      detail = e.what();
    } catch (...) {
    }
    send_error(res, 500, "internal", detail);
  });
}

int Service::start() {
  const ServiceConfig& config = harvester_->config();
  int port = config.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config.host);
  } else if (!server_->bind_to_port(config.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw ConfigError("cannot bind " + config.host + ":" + std::to_string(config.port));
  }
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  if (config.periodic_interval.count() > 0) periodic_ = std::thread([this] { periodic_loop(); });
  spdlog::info("serving on http://{}:{}", config.host, port);
  return port;
}

void Service::periodic_loop() {
  std::unique_lock lock(stop_mutex_);
  while (!stop_cv_.wait_for(lock, harvester_->config().periodic_interval, [this] { return stopping_; })) {
    lock.unlock();
    try {
      PassReport report = harvester_->run_periodic_pass();
      spdlog::info("periodic pass: {} archive checks, {} submissions", report.archives_checked,
                   report.submissions_attempted);
    } catch (const std::exception& e) {
      spdlog::warn("periodic pass failed: {}", e.what());
    }
    lock.lock();
  }
}

void Service::stop() {
  {
    std::lock_guard lock(stop_mutex_);
    stopping_ = true;
  }
  stop_cv_.notify_all();
  server_->stop();
  if (listener_.joinable()) listener_.join();
  if (periodic_.joinable()) periodic_.join();
}

void Service::wait() {
  if (listener_.joinable()) listener_.join();
}

}  // namespace greyharvest
