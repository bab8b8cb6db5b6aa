#pragma once

#include <atomic>
#include <condition_variable>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "greyharvest/config.hpp"
#include "greyharvest/continuity.hpp"
#include "greyharvest/error.hpp"
#include "greyharvest/fetcher.hpp"
#include "greyharvest/resolver.hpp"
#include "greyharvest/store.hpp"

namespace httplib {
class Server;
}

namespace greyharvest {

/// A synchronous resolve did not finish within the configured budget. The
/// resolve keeps running and its result is stored when it completes.
class ResolveTimeout : public Error {
 public:
  using Error::Error;
};

/// The service's state without the HTTP layer: store, fetchers, resolvers
/// and continuity, plus the cache policy. Safe for concurrent use.
class Harvester {
 public:
  /// `foreground` serves user lookups, `background` serves refreshes and
  /// archive traffic. When null, fetchers are built from the config (the
  /// background one honours robots.txt when configured to).
  explicit Harvester(ServiceConfig config, std::shared_ptr<DocumentSource> foreground = nullptr,
                     std::shared_ptr<DocumentSource> background = nullptr, Clock clock = system_now);
  ~Harvester();

  Harvester(const Harvester&) = delete;
  Harvester& operator=(const Harvester&) = delete;

  /// Returns the stored record for uri, resolving synchronously when the
  /// store has none and scheduling a background refresh when the cached one
  /// is older than the refresh window. Throws MalformedUri,
  /// UnsupportedScheme, FetchError or ResolveTimeout.
  BibRecord lookup(const std::string& uri);

  /// Resolves now regardless of the cache (waits for an in-flight resolve
  /// of the same URI instead of starting a second one).
  BibRecord refresh(const std::string& uri);

  std::vector<ArchiveSnapshot> archives(const std::string& uri);
  std::string purl_target(const std::string& id) const { return continuity_.resolve_purl(id); }
  std::optional<Purl> purl_for(const std::string& uri);

  PassReport run_periodic_pass() { return continuity_.run_periodic_pass(); }

  /// Blocks until every background task has finished.
  void drain();

  Store& store() { return store_; }
  Continuity& continuity() { return continuity_; }
  const ServiceConfig& config() const { return config_; }

 private:
  std::shared_future<BibRecord> start_resolve(const std::string& uri, bool background);
  BibRecord do_resolve(const std::string& uri, bool background);
  void after_resolve(const std::string& uri, const BibRecord& record);
  void spawn(std::function<void()> task);

  ServiceConfig config_;
  Clock clock_;
  Store store_;
  std::shared_ptr<HostGate> gate_;
  std::shared_ptr<DocumentSource> foreground_source_;
  std::shared_ptr<DocumentSource> background_source_;
  Resolver foreground_;
  Resolver background_;
  Continuity continuity_;

  std::mutex mutex_;
  std::map<std::string, std::shared_future<BibRecord>> in_flight_;
  std::map<std::string, Timestamp> refreshed_at_;  // last successful resolve this process
  std::vector<std::future<void>> tasks_;
};

/// The REST surface over a Harvester.
class Service {
 public:
  explicit Service(ServiceConfig config, std::shared_ptr<DocumentSource> foreground = nullptr,
                   std::shared_ptr<DocumentSource> background = nullptr, Clock clock = system_now);
  ~Service();

  /// Binds and starts serving on a background thread; returns the bound
  /// port. Throws ConfigError when the address cannot be bound.
  int start();
  void stop();
  /// Blocks until stop() is called or the listener exits.
  void wait();

  Harvester& harvester() { return *harvester_; }

 private:
  void install_routes();
  void periodic_loop();

  std::unique_ptr<Harvester> harvester_;
  std::unique_ptr<httplib::Server> server_;
  std::thread listener_;
  std::thread periodic_;
  std::mutex stop_mutex_;
  std::condition_variable stop_cv_;
  bool stopping_ = false;
};

}  // namespace greyharvest
