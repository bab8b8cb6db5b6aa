#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

#include "greyharvest/continuity.hpp"
#include "greyharvest/fetcher.hpp"
#include "greyharvest/scoring.hpp"

namespace greyharvest {

/// Everything `serve` needs. Loaded from a JSON file, then overridden by
/// command-line flags, then by GREYHARVEST_DATA for the data directory.
///
///   {"host": "127.0.0.1", "port": 8192, "data_dir": "...", "rules_dir": "...",
///    "refresh_hours": 24, "resolve_timeout_ms": 30000, "threads": 8,
///    "periodic_interval_minutes": 60, "recheck_days": 7,
///    "fetch": {"timeout_ms", "max_redirects", "max_body_bytes", "host_interval_ms",
///              "user_agent", "background_respects_robots"},
///    "archives": [{"service", "url_template", "snapshot_pointer",
///                  "timestamp_pointer", "available_pointer", "domains"}],
///    "submission_url_template": "...",
///    "scoring": { ScoreTable::from_json shape }}
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8192;  // 0 picks a free port
  std::filesystem::path data_dir = "greyharvest-data";
  std::optional<std::filesystem::path> rules_dir;
  std::chrono::hours refresh_window{24};
  std::chrono::milliseconds resolve_timeout{30000};
  int threads = 8;
  std::chrono::minutes periodic_interval{60};  // 0 disables the background pass
  FetchPolicy fetch;
  std::chrono::milliseconds host_interval{500};
  bool background_respects_robots = true;
  ContinuityConfig continuity;
  ScoreTable scoring = ScoreTable::defaults();

  /// Throws ConfigError.
  static ServiceConfig from_json(const json::Json& j, ServiceConfig base);
  static ServiceConfig from_json(const json::Json& j);
  static ServiceConfig load(const std::filesystem::path& file, ServiceConfig base);
  static ServiceConfig load(const std::filesystem::path& file);

  /// Applies GREYHARVEST_DATA when set.
  void apply_environment();
};

}  // namespace greyharvest
