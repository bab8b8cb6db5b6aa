#include "greyharvest/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "greyharvest/error.hpp"
#include "greyharvest/hash.hpp"
#include "greyharvest/json_codec.hpp"
#include "greyharvest/uri.hpp"

namespace fs = std::filesystem;

namespace greyharvest {

namespace {

using json::Json;

std::atomic<unsigned long> tmp_counter{0};

std::string errno_text() { return std::strerror(errno); }

void fsync_path(const fs::path& path, int flags) {
  int fd = ::open(path.c_str(), flags);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

void atomic_write(const fs::path& path, std::string_view data) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw StorageError("cannot create " + path.parent_path().string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(tmp_counter++);
  int fd = ::open(tmp.c_str(), O_CREAT | O_WRONLY | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageError("cannot open " + tmp.string() + ": " + errno_text());
  std::size_t written = 0;
  while (written < data.size()) {
    ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      std::string why = errno_text();
      ::close(fd);
      ::unlink(tmp.c_str());
      throw StorageError("write failed for " + path.string() + ": " + why);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(tmp.c_str());
    throw StorageError("fsync failed for " + path.string() + ": " + errno_text());
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    std::string why = errno_text();
    ::unlink(tmp.c_str());
    throw StorageError("rename failed for " + path.string() + ": " + why);
  }
  fsync_path(path.parent_path(), O_RDONLY | O_DIRECTORY);
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<Json> read_json(const fs::path& path) {
  auto bytes = read_file(path);
  if (!bytes) return std::nullopt;
  Json j = Json::parse(*bytes, nullptr, false);
  if (j.is_discarded()) throw StorageError("corrupt store file " + path.string());
  return j;
}

std::string dump(const Json& j) { return j.dump() + "\n"; }

// Version files in id order; temporary files are ignored.
std::vector<std::pair<std::uint64_t, fs::path>> version_files(const fs::path& dir) {
  std::vector<std::pair<std::uint64_t, fs::path>> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    std::string name = entry.path().filename().string();
    if (name.size() < 7 || name[0] != 'v' || name.substr(name.size() - 5) != ".json") continue;
    std::string digits = name.substr(1, name.size() - 6);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) continue;
    out.emplace_back(std::stoull(digits), entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string version_name(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%06llu.json", static_cast<unsigned long long>(v));
  return buf;
}

StoredVersion decode_version(const std::string& bytes, const fs::path& path) {
  Json j = Json::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw StorageError("corrupt version file " + path.string());
  try {
    StoredVersion v;
    v.info.version = j.at("version").get<std::uint64_t>();
    v.info.stored_at = parse_timestamp(j.at("stored_at").get<std::string>()).value_or(Timestamp{});
    v.info.prev_digest = j.value("prev_digest", "");
    v.info.digest = sha256_hex(bytes);
    v.record = json::decode_record(j.at("record"));
    return v;
  } catch (const StorageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StorageError("corrupt version file " + path.string() + ": " + e.what());
  }
}

}  // namespace

Store::Store(fs::path dir, Clock clock) : dir_(std::move(dir)), clock_(std::move(clock)) {
  std::error_code ec;
  for (const char* sub : {"records", "feeds", "canonical", "archives", "submissions", "purls",
                          "purl-index"}) {
    fs::create_directories(dir_ / sub, ec);
    if (ec) throw StorageError("cannot create store directory " + (dir_ / sub).string());
  }
}

std::string Store::key_for(std::string_view uri) { return sha256_hex(uri); }

fs::path Store::record_dir(const std::string& uri) const { return dir_ / "records" / key_for(uri); }

fs::path Store::keyed_file(const char* kind, const std::string& uri) const {
  return dir_ / kind / (key_for(uri) + ".json");
}

std::mutex& Store::writer_lock(const std::string& uri) {
  std::size_t h = std::hash<std::string>{}(uri);
  return writer_locks_[h % writer_locks_.size()];
}

std::uint64_t Store::put_extraction(const std::string& uri, const BibRecord& record) {
  if (record.uri != uri) throw StorageError("record uri does not match key " + uri);
  std::unique_lock lock(io_mutex_);
  fs::path dir = record_dir(uri);
  auto files = version_files(dir);
  std::uint64_t next = files.empty() ? 1 : files.back().first + 1;
  std::string prev_digest;
  if (!files.empty()) {
    auto prev = read_file(files.back().second);
    if (!prev) throw StorageError("cannot read " + files.back().second.string());
    prev_digest = sha256_hex(*prev);
  }
  Json envelope;
  envelope["version"] = next;
  envelope["uri"] = uri;
  envelope["stored_at"] = format_timestamp(clock_());
  envelope["prev_digest"] = prev_digest;
  envelope["record"] = json::encode(record);
  atomic_write(dir / version_name(next), dump(envelope));
  return next;
}

std::optional<StoredVersion> Store::get_latest_version(const std::string& uri) const {
  std::shared_lock lock(io_mutex_);
  auto files = version_files(record_dir(uri));
  if (files.empty()) return std::nullopt;
  auto bytes = read_file(files.back().second);
  if (!bytes) return std::nullopt;
  return decode_version(*bytes, files.back().second);
}

std::optional<BibRecord> Store::get_latest(const std::string& uri) const {
  auto v = get_latest_version(uri);
  if (!v) return std::nullopt;
  return v->record;
}

std::vector<StoredVersion> Store::get_history(const std::string& uri) const {
  std::shared_lock lock(io_mutex_);
  std::vector<StoredVersion> out;
  for (const auto& [id, path] : version_files(record_dir(uri))) {
    auto bytes = read_file(path);
    if (!bytes) throw StorageError("cannot read " + path.string());
    out.push_back(decode_version(*bytes, path));
  }
  return out;
}

bool Store::verify_chain(const std::string& uri) const {
  auto history = get_history(uri);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& v = history[i];
    if (v.info.version != i + 1 || v.record.uri != uri) return false;
    std::string expected = i == 0 ? std::string() : history[i - 1].info.digest;
    if (v.info.prev_digest != expected) return false;
  }
  return true;
}

std::vector<std::string> Store::list_uris() const {
  std::shared_lock lock(io_mutex_);
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir_ / "records", ec)) {
    if (!entry.is_directory()) continue;
    auto files = version_files(entry.path());
    if (files.empty()) continue;
    auto j = read_json(files.front().second);
    if (j && j->contains("uri")) out.push_back(j->at("uri").get<std::string>());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Store::put_feed_fragment(const std::string& entry_uri, const MetadataFragment& fragment) {
  std::unique_lock lock(io_mutex_);
  fs::path path = keyed_file("feeds", entry_uri);
  std::vector<MetadataFragment> fragments;
  if (auto j = read_json(path)) {
    for (const auto& f : j->at("fragments")) fragments.push_back(json::decode_fragment(f));
  }
  bool found = false;
  for (auto& f : fragments) {
    if (f.source == fragment.source && f.fields == fragment.fields) {
      f.observed_at = std::max(f.observed_at, fragment.observed_at);
      f.score = fragment.score;
      found = true;
    }
  }
  if (!found) fragments.push_back(fragment);
  Json j;
  j["uri"] = entry_uri;
  j["fragments"] = Json::array();
  for (const auto& f : fragments) j["fragments"].push_back(json::encode(f));
  atomic_write(path, dump(j));
}

std::vector<MetadataFragment> Store::get_feed_fragments(const std::string& uri) const {
  std::shared_lock lock(io_mutex_);
  std::vector<MetadataFragment> out;
  if (auto j = read_json(keyed_file("feeds", uri))) {
    for (const auto& f : j->at("fragments")) out.push_back(json::decode_fragment(f));
  }
  return out;
}

std::vector<CanonicalEvent> Store::get_events(const std::string& uri) const {
  std::shared_lock lock(io_mutex_);
  std::vector<CanonicalEvent> out;
  if (auto j = read_json(keyed_file("canonical", uri))) {
    for (const auto& e : j->at("events")) out.push_back(json::decode_event(e));
  }
  return out;
}

void Store::put_events(const std::string& uri, const std::vector<CanonicalEvent>& events) {
  std::unique_lock lock(io_mutex_);
  Json j;
  j["uri"] = uri;
  j["events"] = Json::array();
  for (const auto& e : events) j["events"].push_back(json::encode(e));
  atomic_write(keyed_file("canonical", uri), dump(j));
}

std::optional<Purl> Store::get_purl(const std::string& id) const {
  // Ids are base32 tokens; anything else cannot name a file of ours.
  if (id.empty() || id.size() > 64 ||
      !std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); })) {
    return std::nullopt;
  }
  std::shared_lock lock(io_mutex_);
  auto j = read_json(dir_ / "purls" / (id + ".json"));
  if (!j) return std::nullopt;
  return json::decode_purl(*j);
}

std::optional<Purl> Store::get_purl_for_uri(const std::string& uri) const {
  std::optional<std::string> id;
  {
    std::shared_lock lock(io_mutex_);
    auto j = read_json(keyed_file("purl-index", uri));
    if (!j) return std::nullopt;
    id = j->at("id").get<std::string>();
  }
  return get_purl(*id);
}

Purl Store::put_purl(const Purl& purl) {
  if (auto existing = get_purl(purl.id)) return *existing;
  std::unique_lock lock(io_mutex_);
  atomic_write(dir_ / "purls" / (purl.id + ".json"), dump(json::encode(purl)));
  Json index;
  index["uri"] = purl.target_uri;
  index["id"] = purl.id;
  atomic_write(keyed_file("purl-index", purl.target_uri), dump(index));
  return purl;
}

ArchiveState Store::get_archives(const std::string& uri) const {
  std::shared_lock lock(io_mutex_);
  ArchiveState state;
  if (auto j = read_json(keyed_file("archives", uri))) {
    if (j->contains("checked_at")) state.checked_at = parse_timestamp(j->at("checked_at").get<std::string>());
    for (const auto& s : j->at("snapshots")) state.snapshots.push_back(json::decode_snapshot(s));
  }
  return state;
}

void Store::put_archives(const std::string& uri, const ArchiveState& state) {
  std::unique_lock lock(io_mutex_);
  Json j;
  j["uri"] = uri;
  if (state.checked_at) j["checked_at"] = format_timestamp(*state.checked_at);
  j["snapshots"] = Json::array();
  for (const auto& s : state.snapshots) j["snapshots"].push_back(json::encode(s));
  atomic_write(keyed_file("archives", uri), dump(j));
}

SubmissionState Store::get_submission(const std::string& uri) const {
  std::shared_lock lock(io_mutex_);
  SubmissionState s;
  if (auto j = read_json(keyed_file("submissions", uri))) {
    s.submitted = j->value("submitted", false);
    s.attempts = j->value("attempts", 0);
    s.last_status = j->value("last_status", 0);
    if (j->contains("last_attempt")) s.last_attempt = parse_timestamp(j->at("last_attempt").get<std::string>());
    if (j->contains("next_attempt")) s.next_attempt = parse_timestamp(j->at("next_attempt").get<std::string>());
  }
  return s;
}

void Store::put_submission(const std::string& uri, const SubmissionState& s) {
  std::unique_lock lock(io_mutex_);
  Json j;
  j["uri"] = uri;
  j["submitted"] = s.submitted;
  j["attempts"] = s.attempts;
  j["last_status"] = s.last_status;
  if (s.last_attempt) j["last_attempt"] = format_timestamp(*s.last_attempt);
  if (s.next_attempt) j["next_attempt"] = format_timestamp(*s.next_attempt);
  atomic_write(keyed_file("submissions", uri), dump(j));
}

}  // namespace greyharvest
