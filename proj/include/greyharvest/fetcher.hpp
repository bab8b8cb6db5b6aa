#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "greyharvest/document.hpp"

namespace greyharvest {

struct FetchPolicy {
  int max_redirects = 10;
  std::chrono::milliseconds timeout{30000};  // total, across redirects
  std::size_t max_body_bytes = 8u << 20;
  bool respect_robots = false;
  std::string user_agent = default_user_agent();

  static std::string default_user_agent();
};

/// Per-host politeness: one request in flight per host, and a minimum gap
/// between the end of one request and the start of the next. Shared by every
/// fetcher that talks to the same hosts.
class HostGate {
 public:
  explicit HostGate(std::chrono::milliseconds interval = std::chrono::milliseconds(500))
      : interval_(interval) {}

  class Pass {
   public:
    Pass(HostGate& gate, std::string host);
    ~Pass();
    Pass(const Pass&) = delete;
    Pass& operator=(const Pass&) = delete;

   private:
    HostGate& gate_;
    std::string host_;
  };

  std::chrono::milliseconds interval() const { return interval_; }

 private:
  struct Slot {
    bool busy = false;
    std::chrono::steady_clock::time_point next_start{};
  };

  std::chrono::milliseconds interval_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::string, Slot> slots_;
};

/// HTTP(S) fetcher with manual redirect following so every hop is recorded.
class Fetcher : public DocumentSource {
 public:
  explicit Fetcher(FetchPolicy policy = {}, std::shared_ptr<HostGate> gate = nullptr,
                   Clock clock = system_now);

  /// Throws NetworkError, TooManyRedirects, BodyTooLarge, HttpError,
  /// RobotsDisallowed (only when the policy respects robots.txt).
  SourceDocument fetch(const std::string& uri) override;

  const FetchPolicy& policy() const { return policy_; }
  std::shared_ptr<HostGate> gate() const { return gate_; }

 private:
  struct Response {
    int status = 0;
    Headers headers;
    std::string body;
  };

  Response get(const std::string& uri, std::chrono::steady_clock::time_point deadline);
  bool robots_allows(const std::string& uri, std::chrono::steady_clock::time_point deadline);

  FetchPolicy policy_;
  std::shared_ptr<HostGate> gate_;
  Clock clock_;
  std::mutex robots_mutex_;
  std::map<std::string, std::string> robots_cache_;  // origin -> robots.txt body
};

/// Longest-match Allow/Disallow evaluation for the "*" group or the group
/// naming `agent`.
bool robots_allowed(std::string_view robots_txt, std::string_view agent, std::string_view path);

}  // namespace greyharvest
