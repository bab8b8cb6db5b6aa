#pragma once

// Link-rot defences: canonical-URI divergence history, PURLs, and web
// archive lookup plus gated submission.

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "greyharvest/document.hpp"
#include "greyharvest/model.hpp"
#include "greyharvest/store.hpp"

namespace greyharvest {

/// An archive availability endpoint. {uri} in the template is replaced by
/// the percent-encoded URI; the pointers are JSON pointers into the reply.
struct ArchiveEndpoint {
  ArchiveService service = ArchiveService::kInternetArchive;
  std::string url_template;
  std::string snapshot_pointer = "/archived_snapshots/closest/url";
  std::string timestamp_pointer = "/archived_snapshots/closest/timestamp";
  std::string available_pointer = "/archived_snapshots/closest/available";
  std::vector<std::string> domains;  // snapshot hosts accepted for this service

  static ArchiveEndpoint internet_archive();
};

struct ContinuityConfig {
  std::vector<ArchiveEndpoint> archives = {ArchiveEndpoint::internet_archive()};
  std::optional<std::string> submission_template;  // no default: nothing is submitted
  std::chrono::hours recheck_interval{24 * 7};
  std::chrono::hours backoff_base{1};
  std::chrono::hours backoff_cap{24};
};

enum class SubmissionOutcome : std::uint8_t {
  kSubmitted,
  kAlreadySubmitted,
  kBelowThreshold,
  kNotConfigured,
  kDeferred,  // an earlier failure's backoff has not elapsed
  kFailed,
};

std::string_view to_string(SubmissionOutcome outcome);

/// 12-character lowercase base32 prefix of sha256(normalized uri).
std::string purl_id_for(std::string_view uri);

struct PassReport {
  std::size_t archives_checked = 0;
  std::size_t submissions_attempted = 0;
};

class Continuity {
 public:
  /// `source` is used for archive lookups and submissions.
  Continuity(Store& store, DocumentSource& source, ContinuityConfig config = {},
             Clock clock = system_now);

  /// Records a new event when the canonical state differs from the last
  /// stored one (the first observation is a baseline event); otherwise
  /// extends the last event and returns nullopt.
  std::optional<CanonicalEvent> observe_canonical(const std::string& uri, const BibRecord& record);

  std::optional<Purl> allocate_purl(const std::string& uri, const BibRecord& record);

  /// Throws UnknownPurl.
  std::string resolve_purl(const std::string& id) const;

  std::vector<ArchiveSnapshot> check_archives(const std::string& uri,
                                              std::vector<std::string>* warnings = nullptr);

  SubmissionOutcome submit_for_archiving(const std::string& uri, const BibRecord& record);

  /// Re-checks archives older than the recheck interval and retries due
  /// submissions for every stored URI.
  PassReport run_periodic_pass();

  const ContinuityConfig& config() const { return config_; }

 private:
  Store& store_;
  DocumentSource& source_;
  ContinuityConfig config_;
  Clock clock_;
};

}  // namespace greyharvest
