#include "greyharvest/fetcher.hpp"

#include <httplib.h>

#include "greyharvest/error.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"

namespace greyharvest {

namespace {

using SteadyClock = std::chrono::steady_clock;

bool is_redirect(int status) {
  return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

std::chrono::microseconds remaining(SteadyClock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::microseconds>(deadline - SteadyClock::now());
  return std::max(left, std::chrono::microseconds(1000));
}

}  // namespace

std::string FetchPolicy::default_user_agent() {
  return std::string("greyharvest/") + GREYHARVEST_VERSION +
         " (+https://greyharvest.invalid/bot)";
}

HostGate::Pass::Pass(HostGate& gate, std::string host) : gate_(gate), host_(std::move(host)) {
  std::unique_lock lock(gate_.mutex_);
  while (true) {
    Slot& slot = gate_.slots_[host_];
    auto now = SteadyClock::now();
    if (!slot.busy && now >= slot.next_start) {
      slot.busy = true;
      return;
    }
    if (slot.busy) {
      gate_.cv_.wait(lock);
    } else {
      gate_.cv_.wait_until(lock, slot.next_start);
    }
  }
}

HostGate::Pass::~Pass() {
  {
    std::lock_guard lock(gate_.mutex_);
    Slot& slot = gate_.slots_[host_];
    slot.busy = false;
    slot.next_start = SteadyClock::now() + gate_.interval_;
  }
  gate_.cv_.notify_all();
}

Fetcher::Fetcher(FetchPolicy policy, std::shared_ptr<HostGate> gate, Clock clock)
    : policy_(std::move(policy)),
      gate_(gate ? std::move(gate) : std::make_shared<HostGate>()),
      clock_(std::move(clock)) {}

Fetcher::Response Fetcher::get(const std::string& uri, SteadyClock::time_point deadline) {
  UriParts parts = split_uri(uri);
  HostGate::Pass pass(*gate_, parts.origin());
  if (SteadyClock::now() >= deadline) throw NetworkError("timeout waiting for " + parts.host);

  httplib::Client client(parts.origin());
  auto left = remaining(deadline);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(left));
  client.set_read_timeout(left);
  client.set_write_timeout(left);
  client.set_follow_location(false);
  client.set_decompress(true);
  client.set_keep_alive(false);

  httplib::Headers headers = {{"User-Agent", policy_.user_agent},
                              {"Accept-Encoding", "gzip"},
                              {"Accept", "text/html,application/xhtml+xml,application/xml;q=0.9,*/*;q=0.8"}};

  Response out;
  bool too_large = false;
  bool timed_out = false;
  auto on_response = [&](const httplib::Response& r) {
    out.status = r.status;
    for (const auto& [k, v] : r.headers) out.headers.emplace_back(text::to_lower(k), v);
    if (r.has_header("Content-Length") && !r.has_header("Content-Encoding")) {
      auto length = std::strtoull(r.get_header_value("Content-Length").c_str(), nullptr, 10);
      if (length > policy_.max_body_bytes) {
        too_large = true;
        return false;
      }
    }
    return true;
  };
  auto on_content = [&](const char* data, std::size_t size) {
    if (out.body.size() + size > policy_.max_body_bytes) {
      too_large = true;
      return false;
    }
    if (SteadyClock::now() >= deadline) {
      timed_out = true;
      return false;
    }
    out.body.append(data, size);
    return true;
  };

  auto result = client.Get(parts.target(), headers, on_response, on_content);
  if (too_large) throw BodyTooLarge("body of " + uri + " exceeds " + std::to_string(policy_.max_body_bytes) + " bytes");
  if (timed_out || SteadyClock::now() >= deadline) throw NetworkError("timeout fetching " + uri);
  if (!result) throw NetworkError("fetch of " + uri + " failed: " + httplib::to_string(result.error()));
  return out;
}

bool Fetcher::robots_allows(const std::string& uri, SteadyClock::time_point deadline) {
  UriParts parts = split_uri(uri);
  std::string origin = parts.origin();
  std::string robots;
  bool cached = false;
  {
    std::lock_guard lock(robots_mutex_);
    if (auto it = robots_cache_.find(origin); it != robots_cache_.end()) {
      robots = it->second;
      cached = true;
    }
  }
  if (!cached) {
    try {
      Response r = get(origin + "/robots.txt", deadline);
      if (r.status >= 200 && r.status < 300) robots = r.body;
    } catch (const BodyTooLarge&) {
    } catch (const NetworkError&) {
      // Unreachable robots.txt: treat as allow-all, like the major crawlers.
    }
    std::lock_guard lock(robots_mutex_);
    robots_cache_[origin] = robots;
  }
  return robots_allowed(robots, "greyharvest", parts.target());
}

SourceDocument Fetcher::fetch(const std::string& raw_uri) {
  std::string uri = normalize_uri(raw_uri);
  auto deadline = SteadyClock::now() + policy_.timeout;
  SourceDocument doc;
  doc.request_uri = uri;
  std::string current = uri;
  while (true) {
    if (policy_.respect_robots && !robots_allows(current, deadline)) {
      throw RobotsDisallowed("robots.txt disallows " + current);
    }
    Response r = get(current, deadline);
    const std::string* location = find_header(r.headers, "location");
    if (is_redirect(r.status) && location) {
      auto next = try_resolve_reference(current, *location);
      if (!next) throw NetworkError("unusable redirect location from " + current + ": " + *location);
      if (static_cast<int>(doc.redirect_chain.size()) >= policy_.max_redirects) {
        throw TooManyRedirects("more than " + std::to_string(policy_.max_redirects) +
                               " redirects from " + uri);
      }
      doc.redirect_chain.push_back({r.status, *next});
      current = *next;
      continue;
    }
    if (r.status >= 400) {
      throw HttpError(r.status, "HTTP " + std::to_string(r.status) + " for " + current);
    }
    doc.final_uri = current;
    MediaInfo media = detect_media_type(r.headers, r.body);
    doc.media_type = media.type;
    doc.charset = media.charset;
    doc.body = std::move(r.body);
    doc.headers = std::move(r.headers);
    doc.fetched_at = clock_();
    return doc;
  }
}

bool robots_allowed(std::string_view robots_txt, std::string_view agent, std::string_view path) {
  struct Rule {
    bool allow;
    std::string prefix;
  };
  std::vector<Rule> star_rules, agent_rules;
  bool have_agent_group = false;
  std::vector<std::string> group_agents;
  bool in_rules = false;
  std::vector<Rule> current;

  auto flush = [&] {
    for (const auto& a : group_agents) {
      if (a == "*") star_rules.insert(star_rules.end(), current.begin(), current.end());
      else if (text::istarts_with(agent, a)) {
        have_agent_group = true;
        agent_rules.insert(agent_rules.end(), current.begin(), current.end());
      }
    }
    group_agents.clear();
    current.clear();
    in_rules = false;
  };

  for (const auto& raw_line : text::split(robots_txt, "\n")) {
    std::string line = raw_line.substr(0, raw_line.find('#'));
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = text::to_lower(text::trim(line.substr(0, colon)));
    std::string value(text::trim(line.substr(colon + 1)));
    if (key == "user-agent") {
      if (in_rules) flush();
      group_agents.push_back(text::to_lower(value));
    } else if (key == "allow" || key == "disallow") {
      in_rules = true;
      if (key == "disallow" && value.empty()) continue;
      current.push_back({key == "allow", value});
    }
  }
  flush();

  const auto& rules = have_agent_group ? agent_rules : star_rules;
  const Rule* best = nullptr;
  for (const auto& r : rules) {
    if (path.substr(0, r.prefix.size()) != r.prefix) continue;
    if (!best || r.prefix.size() > best->prefix.size() ||
        (r.prefix.size() == best->prefix.size() && r.allow)) {
      best = &r;
    }
  }
  return !best || best->allow;
}

}  // namespace greyharvest
