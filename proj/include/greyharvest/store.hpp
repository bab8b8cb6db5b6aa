#pragma once

// Append-only on-disk store. Layout under the data directory, with
// <key> = sha256 hex of the normalized URI:
//
//   records/<key>/v000001.json   {"version","uri","stored_at","prev_digest","record"}
//   feeds/<key>.json             {"uri","fragments":[...]}
//   canonical/<key>.json         {"uri","events":[...]}
//   archives/<key>.json          {"uri","checked_at","snapshots":[...]}
//   submissions/<key>.json       {"uri","submitted","attempts",...}
//   purls/<id>.json              {"id","target_uri","created_at"}
//   purl-index/<key>.json        {"uri","id"}
//
// prev_digest is the sha256 of the previous version file's bytes, so the
// versions of one URI form a hash chain. Every file is written to a
// temporary name, fsynced and renamed into place.

#include <array>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "greyharvest/model.hpp"

namespace greyharvest {

struct VersionInfo {
  std::uint64_t version = 0;
  Timestamp stored_at{};
  std::string digest;       // sha256 hex of this version file
  std::string prev_digest;  // empty for version 1
};

struct StoredVersion {
  VersionInfo info;
  BibRecord record;
};

struct ArchiveState {
  std::optional<Timestamp> checked_at;
  std::vector<ArchiveSnapshot> snapshots;
};

struct SubmissionState {
  bool submitted = false;
  int attempts = 0;
  int last_status = 0;
  std::optional<Timestamp> last_attempt;
  std::optional<Timestamp> next_attempt;
};

class Store {
 public:
  explicit Store(std::filesystem::path dir, Clock clock = system_now);

  const std::filesystem::path& dir() const { return dir_; }
  static std::string key_for(std::string_view uri);

  /// Appends a version and returns its id (1, 2, ...). record.uri must equal uri.
  std::uint64_t put_extraction(const std::string& uri, const BibRecord& record);
  std::optional<BibRecord> get_latest(const std::string& uri) const;
  std::optional<StoredVersion> get_latest_version(const std::string& uri) const;
  std::vector<StoredVersion> get_history(const std::string& uri) const;
  std::vector<std::string> list_uris() const;

  /// Recomputes the hash chain of a URI's versions.
  bool verify_chain(const std::string& uri) const;

  /// Deduplicates on (source, fields); a duplicate only refreshes observed_at.
  void put_feed_fragment(const std::string& entry_uri, const MetadataFragment& fragment);
  std::vector<MetadataFragment> get_feed_fragments(const std::string& uri) const;

  std::vector<CanonicalEvent> get_events(const std::string& uri) const;
  void put_events(const std::string& uri, const std::vector<CanonicalEvent>& events);

  std::optional<Purl> get_purl(const std::string& id) const;
  std::optional<Purl> get_purl_for_uri(const std::string& uri) const;
  /// Returns the stored purl; an existing one with the same id wins.
  Purl put_purl(const Purl& purl);

  ArchiveState get_archives(const std::string& uri) const;
  void put_archives(const std::string& uri, const ArchiveState& state);

  SubmissionState get_submission(const std::string& uri) const;
  void put_submission(const std::string& uri, const SubmissionState& state);

  /// The single-writer lock for one URI. Callers hold it across
  /// read-modify-write sequences spanning several calls.
  std::mutex& writer_lock(const std::string& uri);

 private:
  std::filesystem::path record_dir(const std::string& uri) const;
  std::filesystem::path keyed_file(const char* kind, const std::string& uri) const;

  std::filesystem::path dir_;
  Clock clock_;
  std::array<std::mutex, 64> writer_locks_;  // striped by key
  mutable std::shared_mutex io_mutex_;       // writers exclusive, readers shared
};

}  // namespace greyharvest
