#include "greyharvest/continuity.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "greyharvest/error.hpp"
#include "greyharvest/hash.hpp"
#include "greyharvest/json_codec.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest {

namespace {

std::optional<Timestamp> parse_archive_time(const std::string& s) {
  if (s.size() == 14 && std::all_of(s.begin(), s.end(), text::is_ascii_digit)) {
    auto num = [&](std::size_t pos, std::size_t len) { return std::stoi(s.substr(pos, len)); };
    auto date = PartialDate::make(num(0, 4), num(4, 2), num(6, 2));
    if (!date || num(8, 2) > 23 || num(10, 2) > 59 || num(12, 2) > 60) return std::nullopt;
    return make_timestamp(num(0, 4), num(4, 2), num(6, 2), num(8, 2), num(10, 2), num(12, 2));
  }
  return parse_timestamp(s);
}

bool host_in(const std::string& host, const std::vector<std::string>& domains) {
  return std::any_of(domains.begin(), domains.end(), [&](const std::string& d) {
    std::string dl = text::to_lower(d);
    return host == dl || (host.size() > dl.size() && host.compare(host.size() - dl.size(), dl.size(), dl) == 0 &&
                          host[host.size() - dl.size() - 1] == '.');
  });
}

std::string expand(const std::string& tmpl, const std::string& uri) {
  std::string out = tmpl;
  std::string encoded = percent_encode(uri);
  for (std::size_t pos = out.find("{uri}"); pos != std::string::npos; pos = out.find("{uri}", pos)) {
    out.replace(pos, 5, encoded);
    pos += encoded.size();
  }
  return out;
}

std::optional<json::Json> at_pointer(const json::Json& j, const std::string& pointer) {
  if (pointer.empty()) return std::nullopt;
  try {
    json::Json::json_pointer p(pointer);
    if (!j.contains(p)) return std::nullopt;
    return j.at(p);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

ArchiveEndpoint ArchiveEndpoint::internet_archive() {
  ArchiveEndpoint e;
  e.service = ArchiveService::kInternetArchive;
  e.url_template = "https://archive.org/wayback/available?url={uri}";
  e.domains = {"web.archive.org", "archive.org"};
  return e;
}

std::string_view to_string(SubmissionOutcome outcome) {
  switch (outcome) {
    case SubmissionOutcome::kSubmitted: return "submitted";
    case SubmissionOutcome::kAlreadySubmitted: return "already_submitted";
    case SubmissionOutcome::kBelowThreshold: return "below_threshold";
    case SubmissionOutcome::kNotConfigured: return "not_configured";
    case SubmissionOutcome::kDeferred: return "deferred";
    case SubmissionOutcome::kFailed: return "failed";
  }
  return "unknown";
}

std::string purl_id_for(std::string_view uri) {
  auto digest = sha256(uri);
  return base32_lower(digest.data(), digest.size()).substr(0, 12);
}

Continuity::Continuity(Store& store, DocumentSource& source, ContinuityConfig config, Clock clock)
    : store_(store), source_(source), config_(std::move(config)), clock_(std::move(clock)) {}

std::optional<CanonicalEvent> Continuity::observe_canonical(const std::string& raw_uri,
                                                            const BibRecord& record) {
  std::string uri = normalize_uri(raw_uri);
  std::optional<std::string> canonical = record.canonical_uri;
  bool was_canonical = !canonical || *canonical == uri;
  Timestamp now = clock_();

  std::lock_guard guard(store_.writer_lock(uri));
  auto events = store_.get_events(uri);
  if (!events.empty()) {
    CanonicalEvent& last = events.back();
    if (last.was_canonical == was_canonical && last.canonical_uri == canonical) {
      last.last_observed = std::max(last.last_observed, now);
      store_.put_events(uri, events);
      return std::nullopt;
    }
    now = std::max(now, last.last_observed);
  }
  CanonicalEvent event{uri, canonical, was_canonical, now, now};
  events.push_back(event);
  store_.put_events(uri, events);
  return event;
}

std::optional<Purl> Continuity::allocate_purl(const std::string& raw_uri, const BibRecord& record) {
  if (classify(record) < Completeness::kTcda) return std::nullopt;
  std::string uri = normalize_uri(raw_uri);
  if (auto existing = store_.get_purl_for_uri(uri)) return existing;
  return store_.put_purl(Purl{purl_id_for(uri), uri, clock_()});
}

std::string Continuity::resolve_purl(const std::string& id) const {
  auto purl = store_.get_purl(id);
  if (!purl) throw UnknownPurl("unknown purl: " + id);
  auto events = store_.get_events(purl->target_uri);
  if (events.empty() || !events.back().canonical_uri) return purl->target_uri;
  const std::string& canonical = *events.back().canonical_uri;
  // Claims pointing at another site are recorded but never followed.
  try {
    if (registrable_domain(uri_host(canonical)) == registrable_domain(uri_host(purl->target_uri))) {
      return canonical;
    }
  } catch (const Error&) {
  }
  return purl->target_uri;
}

std::vector<ArchiveSnapshot> Continuity::check_archives(const std::string& raw_uri,
                                                        std::vector<std::string>* warnings) {
  std::string uri = normalize_uri(raw_uri);
  auto warn = [&](std::string message) {
    spdlog::warn("{}", message);
    if (warnings) warnings->push_back(std::move(message));
  };

  std::vector<ArchiveSnapshot> found;
  std::vector<ArchiveService> answered;
  for (const auto& endpoint : config_.archives) {
    std::string service_name(to_string(endpoint.service));
    json::Json reply;
    try {
      SourceDocument doc = source_.fetch(expand(endpoint.url_template, uri));
      reply = json::Json::parse(doc.body, nullptr, false);
    } catch (const std::exception& e) {
      warn(service_name + " unavailable: " + e.what());
      continue;
    }
    if (reply.is_discarded()) {
      warn(service_name + " returned invalid JSON");
      continue;
    }
    answered.push_back(endpoint.service);
    if (auto available = at_pointer(reply, endpoint.available_pointer)) {
      if (available->is_boolean() && !available->get<bool>()) continue;
    }
    auto snapshot = at_pointer(reply, endpoint.snapshot_pointer);
    if (!snapshot || !snapshot->is_string() || snapshot->get<std::string>().empty()) continue;
    auto snapshot_uri = try_normalize_uri(snapshot->get<std::string>());
    if (!snapshot_uri) {
      warn(service_name + " returned an unusable snapshot URI");
      continue;
    }
    if (!host_in(uri_host(*snapshot_uri), endpoint.domains)) {
      warn(service_name + " snapshot host outside its domain set: " + *snapshot_uri);
      continue;
    }
    ArchiveSnapshot s;
    s.service = endpoint.service;
    s.snapshot_uri = *snapshot_uri;
    if (auto ts = at_pointer(reply, endpoint.timestamp_pointer); ts && ts->is_string()) {
      s.snapshot_time = parse_archive_time(ts->get<std::string>()).value_or(Timestamp{});
    }
    found.push_back(std::move(s));
  }

  std::lock_guard guard(store_.writer_lock(uri));
  ArchiveState state = store_.get_archives(uri);
  std::vector<ArchiveSnapshot> merged;
  for (const auto& s : state.snapshots) {
    if (std::find(answered.begin(), answered.end(), s.service) == answered.end()) merged.push_back(s);
  }
  for (const auto& s : found) merged.push_back(s);
  std::sort(merged.begin(), merged.end(), [](const ArchiveSnapshot& a, const ArchiveSnapshot& b) {
    return std::tie(a.service, a.snapshot_uri) < std::tie(b.service, b.snapshot_uri);
  });
  bool changed = merged != state.snapshots;
  state.snapshots = merged;
  state.checked_at = clock_();
  store_.put_archives(uri, state);

  if (changed) {
    if (auto latest = store_.get_latest(uri)) {
      latest->archives = merged;
      store_.put_extraction(uri, *latest);
    }
  }
  return found;
}

SubmissionOutcome Continuity::submit_for_archiving(const std::string& raw_uri, const BibRecord& record) {
  if (classify(record) < Completeness::kTcda) return SubmissionOutcome::kBelowThreshold;
  if (!config_.submission_template) return SubmissionOutcome::kNotConfigured;
  std::string uri = normalize_uri(raw_uri);
  Timestamp now = clock_();

  std::lock_guard guard(store_.writer_lock(uri));
  SubmissionState state = store_.get_submission(uri);
  if (state.submitted) return SubmissionOutcome::kAlreadySubmitted;
  if (state.next_attempt && now < *state.next_attempt) return SubmissionOutcome::kDeferred;

  ++state.attempts;
  state.last_attempt = now;
  try {
    source_.fetch(expand(*config_.submission_template, uri));
    state.submitted = true;
    state.last_status = 200;
    state.next_attempt.reset();
    store_.put_submission(uri, state);
    return SubmissionOutcome::kSubmitted;
  } catch (const HttpError& e) {
    state.last_status = e.status();
  } catch (const std::exception&) {
    state.last_status = 0;
  }
  auto delay = config_.backoff_base;
  for (int i = 1; i < state.attempts && delay < config_.backoff_cap; ++i) delay *= 2;
  delay = std::min(delay, config_.backoff_cap);
  state.next_attempt = now + std::chrono::duration_cast<std::chrono::seconds>(delay);
  store_.put_submission(uri, state);
  spdlog::warn("archive submission for {} failed (status {}), next attempt {}", uri,
               state.last_status, format_timestamp(*state.next_attempt));
  return SubmissionOutcome::kFailed;
}

PassReport Continuity::run_periodic_pass() {
  PassReport report;
  Timestamp now = clock_();
  for (const auto& uri : store_.list_uris()) {
    ArchiveState archives = store_.get_archives(uri);
    if (!archives.checked_at || now - *archives.checked_at >= config_.recheck_interval) {
      check_archives(uri);
      ++report.archives_checked;
    }
    auto latest = store_.get_latest(uri);
    if (!latest || classify(*latest) < Completeness::kTcda || !config_.submission_template) continue;
    SubmissionState s = store_.get_submission(uri);
    if (s.submitted || (s.next_attempt && now < *s.next_attempt)) continue;
    submit_for_archiving(uri, *latest);
    ++report.submissions_attempted;
  }
  return report;
}

}  // namespace greyharvest
