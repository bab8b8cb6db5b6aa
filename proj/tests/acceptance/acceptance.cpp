// Acceptance suite: one line per criterion, non-zero exit when any fails.

#include <httplib.h>
#include <signal.h>
#include <spdlog/spdlog.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "greyharvest/cli.hpp"
#include "greyharvest/continuity.hpp"
#include "greyharvest/embedder.hpp"
#include "greyharvest/extractors.hpp"
#include "greyharvest/fetcher.hpp"
#include "greyharvest/hash.hpp"
#include "greyharvest/json_codec.hpp"
#include "greyharvest/resolver.hpp"
#include "greyharvest/serializers.hpp"
#include "greyharvest/service.hpp"
#include "greyharvest/site_rules.hpp"
#include "greyharvest/store.hpp"
#include "greyharvest/text.hpp"
#include "greyharvest/uri.hpp"
#include "support/corpus.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace gh = greyharvest;
namespace t = greyharvest::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Checker {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  Outcome outcome(const std::string& summary) const {
    if (failed_ == 0) return {true, summary};
    std::string d = std::to_string(failed_) + " check(s) failed: ";
    for (std::size_t i = 0; i < failures_.size(); ++i) d += (i ? "; " : "") + failures_[i];
    return {false, d};
  }

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

std::string expected_view(const t::ExpectedRecord& e) {
  gh::json::Json j;
  j["title"] = e.title ? gh::json::Json(*e.title) : gh::json::Json();
  j["authors"] = e.authors;
  j["issued"] = e.issued ? gh::json::Json(*e.issued) : gh::json::Json();
  j["container"] = e.container ? gh::json::Json(*e.container) : gh::json::Json();
  j["canonical_uri"] = e.canonical_uri ? gh::json::Json(*e.canonical_uri) : gh::json::Json();
  return j.dump();
}

std::string record_view(const gh::BibRecord& r) {
  t::ExpectedRecord e;
  e.title = r.title;
  for (const auto& p : r.authors) e.authors.push_back(p.literal);
  if (r.issued) e.issued = r.issued->iso();
  e.container = r.container;
  e.canonical_uri = r.canonical_uri;
  return expected_view(e);
}

gh::ResolveTrace resolve_fixture(const t::Fixture& fx, const gh::ResolverOptions& options) {
  t::OfflineFixture off;
  t::load_offline(fx, off);
  gh::Resolver resolver(off.source, options, nullptr, t::fixed_clock());
  return resolver.resolve_document(off.document);
}

// ---------------------------------------------------------------------------

Outcome fixture_corpus() {
  Checker c;
  auto fixtures = t::load_manifest();
  c.require(fixtures.size() >= 16, "corpus has fewer than 16 pages");
  std::set<std::string> sources_seen;
  for (const auto& fx : fixtures) {
    std::vector<std::string> args = {"greyharvest", "cite", "--offline", fx.path().string(),
                                     "--as-uri", fx.uri, "--format", "record",
                                     "--rules-dir", t::rules_dir().string()};
    for (const auto& a : fx.attach) {
      args.push_back("--attach");
      args.push_back(a.uri + "=" + (t::corpus_dir() / a.file).string());
    }
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = gh::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    c.require(code == 0, fx.name + ": exit code " + std::to_string(code) + " " + err.str());
    auto j = gh::json::Json::parse(out.str(), nullptr, false);
    if (j.is_discarded()) {
      c.require(false, fx.name + ": output is not JSON");
      continue;
    }
    gh::BibRecord r = gh::json::decode_record(j);
    c.require(record_view(r) == expected_view(fx.expected),
              fx.name + ": got " + record_view(r) + " want " + expected_view(fx.expected));
    c.require(std::string(gh::to_string(gh::classify(r))) == fx.expected_class,
              fx.name + ": class " + std::string(gh::to_string(gh::classify(r))));
    for (const auto& [field, source] : r.provenance) sources_seen.insert(std::string(gh::to_string(source)));
  }
  for (const char* needed : {"html-title", "meta", "dublin-core", "google-scholar", "eprints", "prism", "ogp",
                             "coins", "twitter", "rss", "atom", "uri-date", "pdf", "ceur-ws", "w3c",
                             "sciencedirect", "worldcat", "orcid", "openlibrary", "schema-org"}) {
    c.require(sources_seen.count(needed) == 1, std::string("no fixture exercises ") + needed);
  }
  return c.outcome(std::to_string(fixtures.size()) + " fixtures match their pinned records; " +
                   std::to_string(sources_seen.size()) + " sources exercised");
}

void check_letters(Checker& c, const gh::MetadataFragment& f, const std::string& where, std::size_t& checked) {
  for (gh::Field field : gh::kAllFields) {
    if (f.fields.has(field)) {
      ++checked;
      c.require(gh::grants(f.source, field), where + ": " + std::string(gh::to_string(f.source)) +
                                                 " emitted " + std::string(gh::to_string(field)));
    }
  }
}

void run_every_extractor(const gh::SourceDocument& doc, const std::vector<gh::SiteRule>& rules,
                         const std::function<void(const gh::MetadataFragment&)>& sink) {
  auto take = [&](const gh::ExtractionResult& r) {
    for (const auto& f : r.fragments) sink(f);
  };
  gh::ParsedPage page = gh::ParsedPage::parse(doc);
  take(gh::extract_html_all(page));
  take(gh::apply_site_rules(page, rules));
  try {
    take(gh::extract_link_context(doc.final_uri, page, rules));
  } catch (const gh::LinkNotFound&) {
  }
  try {
    auto feed = gh::extract_feed(doc);
    for (const auto& e : feed.entries) sink(e.fragment);
  } catch (const gh::FeedParseError&) {
  }
  take(gh::extract_pdf_info(doc));
  if (auto f = gh::infer_date_from_uri(doc.final_uri, 2020, doc.fetched_at)) sink(*f);
}

Outcome letter_discipline() {
  Checker c;
  std::size_t checked = 0;
  auto options = t::corpus_options();
  for (const auto& fx : t::load_manifest()) {
    auto trace = resolve_fixture(fx, options);
    for (const auto& f : trace.fragments) check_letters(c, f, fx.name, checked);
  }
  // Every extractor over every corpus file, whatever its type.
  for (const auto& path : t::corpus_files()) {
    auto doc = gh::make_document("http://ceur-ws.org/Vol-1000/" + path.filename().string(), t::read_file(path));
    run_every_extractor(doc, options.rules, [&](const gh::MetadataFragment& f) {
      check_letters(c, f, path.filename().string(), checked);
    });
  }
  c.require(checked > 100, "too few populated fields inspected: " + std::to_string(checked));
  return c.outcome(std::to_string(checked) + " emitted fields all within granted letters");
}

Outcome merge_determinism() {
  Checker c;
  auto options = t::corpus_options();
  std::mt19937_64 rng(20120401);
  std::size_t fixtures = 0;
  for (const auto& fx : t::load_manifest()) {
    if (!fx.multi_source) continue;
    ++fixtures;
    auto trace = resolve_fixture(fx, options);
    std::set<gh::SourceKind> sources;
    for (const auto& f : trace.fragments) sources.insert(f.source);
    c.require(sources.size() >= 2, fx.name + " is not multi-source");
    auto fragments = trace.fragments;
    std::string baseline = gh::json::encode(gh::merge(fragments, options.table, fx.uri, gh::make_timestamp(2020, 1, 1))).dump();
    c.require(baseline == gh::json::encode(trace.record).dump(), fx.name + ": merge differs from the resolver's");
    for (int i = 0; i < 1000; ++i) {
      std::shuffle(fragments.begin(), fragments.end(), rng);
      std::string got = gh::json::encode(gh::merge(fragments, options.table, fx.uri, gh::make_timestamp(2020, 1, 1))).dump();
      if (got != baseline) {
        c.require(false, fx.name + ": permutation " + std::to_string(i) + " changed the record");
        break;
      }
    }
  }
  c.require(fixtures >= 5, "fewer than 5 multi-source fixtures");
  return c.outcome(std::to_string(fixtures) + " fixtures x 1000 permutations, identical records");
}

Outcome date_heuristic() {
  Checker c;
  std::mt19937_64 rng(1985);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int current_year = 2020;
  std::vector<std::string> prefixes = {"", "/blog", "/archives", "/en/news", "/~user/posts"};
  std::vector<std::string> slugs = {"/hello-world/", "/on-link-rot", "/", "/index.html", "/a-b-c/?x=1"};
  int recalled = 0, false_positives = 0;
  for (int i = 0; i < 100; ++i) {
    int year = pick(1990, current_year);
    int month = pick(1, 12);
    bool with_day = pick(0, 1) == 1;
    int day = pick(1, gh::days_in_month(year, month));
    bool pad = pick(0, 1) == 1;
    auto num = [&](int v) { return pad && v < 10 ? "0" + std::to_string(v) : std::to_string(v); };
    std::string uri = "http://host" + std::to_string(i) + ".example.org" + prefixes[static_cast<std::size_t>(i % 5)] +
                      "/" + std::to_string(year) + "/" + num(month) + (with_day ? "/" + num(day) : "") +
                      slugs[static_cast<std::size_t>(pick(0, 4))];
    auto f = gh::infer_date_from_uri(gh::normalize_uri(uri), current_year, gh::make_timestamp(2020, 6, 1));
    auto want = with_day ? gh::PartialDate::make(year, month, day) : gh::PartialDate::make(year, month);
    if (f && f->fields.issued == want) {
      ++recalled;
    } else {
      c.require(false, "missed " + uri);
    }
  }
  for (int i = 0; i < 100; ++i) {
    int year = pick(1995, 2015);
    int month = pick(1, 12);
    std::string path;
    switch (i % 5) {
      case 0: path = "/" + std::to_string(year) + "/13/" + std::to_string(pick(1, 28)) + "/post"; break;
      case 1: path = "/1985/" + std::to_string(month) + "/" + std::to_string(pick(1, 28)) + "/post"; break;
      case 2: path = "/post" + std::to_string(year) + "/" + std::to_string(month) + "/x"; break;
      case 3: path = "/" + std::to_string(year) + "-" + std::to_string(month) + "-01-title/"; break;
      default: path = "/v" + std::to_string(year) + "x/" + std::to_string(month) + "/item"; break;
    }
    std::string uri = "http://decoy" + std::to_string(i) + ".example.net" + path;
    if (gh::infer_date_from_uri(gh::normalize_uri(uri), current_year, gh::make_timestamp(2020, 6, 1))) {
      ++false_positives;
      c.require(false, "false positive on " + uri);
    }
  }
  return c.outcome("recall " + std::to_string(recalled) + "/100, false positives " +
                   std::to_string(false_positives) + "/100");
}

Outcome embedder_round_trip() {
  Checker c;
  t::RecordGenerator gen(42);
  gh::ResolverOptions options;
  for (int i = 0; i < 100; ++i) {
    gh::BibRecord r = gen.tcda_record(i);
    r.uri = gh::normalize_uri(r.uri);
    gh::Markup m = gh::emit_markup(r);
    std::string page = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">\n" + m.head_html +
                       "</head><body>\n<p>Post body.</p>\n" + m.body_html + "</body></html>\n";
    gh::MapSource none;
    gh::Resolver resolver(none, options, nullptr, t::fixed_clock());
    auto trace = resolver.resolve_document(gh::make_document(r.uri, page, {}, gh::make_timestamp(2020, 1, 1)));
    const gh::BibRecord& got = trace.record;
    bool same = got.title == r.title && got.authors == r.authors && got.issued == r.issued &&
                got.container == r.container && got.canonical_uri == std::optional<std::string>(r.uri);
    c.require(same, "record " + std::to_string(i) + ": got " + record_view(got) + " want " + record_view(r));
  }
  return c.outcome("100 random TCDA records survive emit -> page -> resolve");
}

Outcome coins_mismatch() {
  Checker c;
  auto fixtures = t::load_manifest();
  const auto& fx = t::fixture_named(fixtures, "coins-mismatch");
  auto options = t::corpus_options();
  auto trace = resolve_fixture(fx, options);
  for (const auto& f : trace.fragments) c.require(f.source != gh::SourceKind::kCoins, "a CoINS fragment was kept");
  for (const auto& [field, source] : trace.record.provenance) {
    c.require(source != gh::SourceKind::kCoins, "record field from CoINS");
  }
  c.require(trace.record.title != std::optional<std::string>("The Original Paper"), "title leaked from CoINS");
  c.require(trace.record.container != std::optional<std::string>("Journal of Originals"), "container leaked");
  c.require(!trace.record.issued, "date leaked from CoINS");
  // Control: the same span pointing at the page itself is used.
  t::OfflineFixture off;
  t::load_offline(fx, off);
  std::string body = off.document.body;
  std::string foreign = "rft_id=http%3A%2F%2Fjournal.example.org%2Fpaper%2F7";
  body.replace(body.find(foreign), foreign.size(), "rft_id=" + gh::percent_encode(fx.uri));
  gh::Resolver resolver(off.source, options, nullptr, t::fixed_clock());
  auto control = resolver.resolve_document(gh::make_document(fx.uri, body, {}, gh::make_timestamp(2020, 1, 1)));
  c.require(control.record.provenance.count(gh::Field::kIssued) &&
                control.record.provenance.at(gh::Field::kIssued) == gh::SourceKind::kCoins,
            "control: matching CoINS was not used");
  return c.outcome("foreign rft_id contributes 0 fields; matching control contributes");
}

Outcome sibling_inference() {
  Checker c;
  auto fixtures = t::load_manifest();
  const auto& fx = t::fixture_named(fixtures, "feed-siblings");
  auto trace = resolve_fixture(fx, t::corpus_options());
  const auto& r = trace.record;
  c.require(r.authors.size() == 1 && r.authors.front().literal == "A One", "author is not A One: " + record_view(r));
  c.require(r.provenance.count(gh::Field::kAuthors) &&
                r.provenance.at(gh::Field::kAuthors) == gh::SourceKind::kFeedInference,
            "author not flagged as inferred");
  c.require(!r.issued, "date was inferred");
  for (const auto& p : r.authors) c.require(p.literal != "admin", "blocklisted author kept");
  return c.outcome("author 'A One' via feed-inference, date absent");
}

Outcome serializer_conformance() {
  Checker c;
  t::RecordGenerator gen(8);
  const char* months[] = {"jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  for (int i = 0; i < 50; ++i) {
    gh::BibRecord r = gen.any_record(i);
    r.uri = gh::normalize_uri(r.uri);
    if (r.canonical_uri) r.canonical_uri = gh::normalize_uri(*r.canonical_uri);
    std::string tag = "record " + std::to_string(i) + ": ";
    const std::string link = r.canonical_uri ? *r.canonical_uri : r.uri;

    auto cp = gh::json::Json::parse(gh::to_citeproc(r), nullptr, false);
    c.require(!cp.is_discarded(), tag + "citeproc is not JSON");
    if (!cp.is_discarded()) {
      for (const char* key : {"id", "type", "URL"}) c.require(cp.contains(key), tag + "citeproc lacks " + key);
      c.require(cp.value("URL", "") == link, tag + "citeproc URL");
      c.require(!r.title || cp.value("title", "") == *r.title, tag + "citeproc title");
      c.require(r.authors.empty() || (cp.contains("author") && cp["author"].size() == r.authors.size()),
                tag + "citeproc authors");
      c.require(!r.issued || (cp.contains("issued") && cp["issued"]["date-parts"][0][0] == r.issued->year),
                tag + "citeproc issued");
      c.require(!r.container || cp.value("container-title", "") == *r.container, tag + "citeproc container");
    }

    try {
      auto bib = t::parse_bibtex(gh::to_bibtex(r));
      std::map<std::string, std::string> want;
      if (r.title) want["title"] = *r.title;
      if (!r.authors.empty()) {
        std::vector<std::string> names;
        for (const auto& p : r.authors) names.push_back(p.literal);
        want["author"] = gh::text::join(names, " and ");
      }
      if (r.issued) {
        want["year"] = std::to_string(r.issued->year);
        if (r.issued->month) want["month"] = months[*r.issued->month - 1];
      }
      want["howpublished"] = link;
      if (!r.archives.empty()) want["note"] = "Archived at: " + r.archives.front().snapshot_uri;
      c.require(bib.fields == want, tag + "bibtex fields differ");
      c.require(bib.type == "misc", tag + "bibtex type");
    } catch (const std::exception& e) {
      c.require(false, tag + e.what());
    }

    std::string ris = gh::to_ris(r);
    std::size_t ty = 0, er = 0, lines = 0;
    bool crlf = ris.size() >= 2 && ris.substr(ris.size() - 2) == "\r\n";
    std::size_t pos = 0;
    while (pos < ris.size()) {
      std::size_t nl = ris.find('\n', pos);
      if (nl == std::string::npos || nl == 0 || ris[nl - 1] != '\r') {
        crlf = false;
        break;
      }
      std::string line = ris.substr(pos, nl - 1 - pos);
      if (line.rfind("TY  - ", 0) == 0) ty += 1;
      if (line.rfind("ER  - ", 0) == 0) er += 1;
      ++lines;
      pos = nl + 1;
    }
    c.require(ty == 1 && er == 1, tag + "RIS TY/ER count");
    c.require(crlf, tag + "RIS line endings");
    c.require(ris.rfind("TY  - ", 0) == 0, tag + "RIS does not start with TY");

    try {
      auto triples = t::TurtleParser(gh::to_dc_rdf(r)).parse();
      bool title_ok = !r.title;
      for (const auto& tr : triples) {
        c.require(tr.subject == "<" + r.uri + ">", tag + "turtle subject " + tr.subject);
        if (tr.predicate == "<http://purl.org/dc/elements/1.1/title>") title_ok = tr.object == "\"" + *r.title + "\"";
      }
      c.require(title_ok, tag + "turtle title");
    } catch (const std::exception& e) {
      c.require(false, tag + e.what());
    }

    std::string wiki = gh::to_wiki_cite(r);
    c.require(wiki.find("|url=") != std::string::npos, tag + "wiki url");
    c.require(!r.title || wiki.find("|title=") != std::string::npos, tag + "wiki title");
    c.require(wiki.rfind("{{cite web", 0) == 0 && wiki.size() >= 2 && wiki.substr(wiki.size() - 2) == "}}",
              tag + "wiki template delimiters");
  }
  return c.outcome("50 random records x 5 formats conform");
}

std::string page_with_og_url(const std::string& og_url) {
  return "<!DOCTYPE html><html><head><meta charset=\"utf-8\"><title>Russet</title>"
         "<meta property=\"og:title\" content=\"A Post That Moves\">"
         "<meta property=\"og:site_name\" content=\"Russet Blog\">"
         "<meta property=\"article:published_time\" content=\"2012-06-01\">"
         "<meta property=\"article:author\" content=\"Phillip Lord\">"
         "<meta property=\"og:url\" content=\"" + og_url + "\"></head><body></body></html>";
}

gh::ServiceConfig quiet_service_config(const std::filesystem::path& dir) {
  gh::ServiceConfig config;
  config.port = 0;
  config.data_dir = dir;
  config.periodic_interval = std::chrono::minutes(0);
  config.continuity.archives.clear();
  return config;
}

Outcome canonical_tracking() {
  Checker c;
  t::FixtureServer server;
  t::TempDir dir;
  const std::string uri = server.uri("/2012/06/a-post-that-moves/");
  const std::string moved = server.uri("/new-home/a-post-that-moves/");
  server.set("/2012/06/a-post-that-moves/", t::CannedResponse{200, page_with_og_url(uri)});

  gh::Service service(quiet_service_config(dir.path()));
  int port = service.start();
  httplib::Client client("127.0.0.1", port);
  auto first = client.Get("/api/json?uri=" + gh::percent_encode(uri));
  c.require(first && first->status == 200, "first lookup failed");
  auto& store = service.harvester().store();
  c.require(store.get_events(uri).size() == 1, "baseline event missing");

  server.set("/2012/06/a-post-that-moves/", t::CannedResponse{200, page_with_og_url(moved)});
  service.harvester().refresh(uri);
  service.harvester().refresh(uri);  // same state again: nothing new
  auto events = store.get_events(uri);
  c.require(events.size() == 2, "expected exactly one appended event, have " + std::to_string(events.size()));
  if (events.size() == 2) {
    c.require(!events.back().was_canonical && events.back().canonical_uri == moved, "event does not record the move");
  }
  auto purl = store.get_purl_for_uri(uri);
  c.require(purl.has_value(), "no PURL allocated");
  if (purl) {
    auto res = client.Get("/purl/" + purl->id);
    c.require(res && res->status == 302, "purl did not 302");
    c.require(res && res->get_header_value("Location") == moved,
              "purl Location " + (res ? res->get_header_value("Location") : std::string("-")));
  }
  service.stop();
  return c.outcome("one CanonicalEvent appended; /purl 302 -> moved canonical");
}

Outcome archive_gating() {
  Checker c;
  t::FixtureServer server;
  t::TempDir dir;
  server.set("/save", t::CannedResponse{200, "ok", "text/plain"});
  gh::Store store(dir.path());
  gh::FetchPolicy policy;
  gh::Fetcher fetcher(policy, std::make_shared<gh::HostGate>(std::chrono::milliseconds(20)));
  gh::ContinuityConfig config;
  config.archives.clear();
  config.submission_template = server.uri("/save?url={uri}");
  gh::Continuity continuity(store, fetcher, config);

  t::RecordGenerator gen(10);
  std::vector<gh::BibRecord> tcda, partial;
  for (int i = 0; i < 3; ++i) {
    auto r = gen.tcda_record(i);
    r.uri = gh::normalize_uri(r.uri);
    tcda.push_back(r);
    auto p = gen.tcda_record(100 + i);
    p.uri = gh::normalize_uri(p.uri);
    if (i == 0) p.authors.clear();
    if (i == 1) p.container.reset();
    if (i == 2) p.issued.reset();
    partial.push_back(p);
  }
  for (const auto& r : tcda) store.put_extraction(r.uri, r);
  for (const auto& r : partial) store.put_extraction(r.uri, r);

  for (int round = 0; round < 3; ++round) {
    for (const auto& r : tcda) {
      auto outcome = continuity.submit_for_archiving(r.uri, r);
      c.require(outcome == (round == 0 ? gh::SubmissionOutcome::kSubmitted : gh::SubmissionOutcome::kAlreadySubmitted),
                "unexpected outcome " + std::string(gh::to_string(outcome)));
    }
    for (const auto& r : partial) {
      c.require(continuity.submit_for_archiving(r.uri, r) == gh::SubmissionOutcome::kBelowThreshold,
                "PARTIAL record not gated");
    }
    continuity.run_periodic_pass();
  }
  c.require(server.hits("/save") == 3, "expected 3 submissions, saw " + std::to_string(server.hits("/save")));
  for (const auto& entry : server.request_log()) {
    for (const auto& r : partial) {
      c.require(entry.find(gh::percent_encode(r.uri)) == std::string::npos, "PARTIAL record submitted");
    }
  }
  return c.outcome("3 TCDA records submitted once each; 3 PARTIAL never");
}

// Runs the CLI binary as a child process; stdout's first line is the port.
class ServeProcess {
 public:
  explicit ServeProcess(const std::vector<std::string>& args) {
    int fds[2];
    if (pipe(fds) != 0) throw std::runtime_error("pipe failed");
    pid_ = fork();
    if (pid_ == 0) {
      dup2(fds[1], STDOUT_FILENO);
      close(fds[0]);
      close(fds[1]);
      std::vector<char*> argv;
      for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      execv(argv[0], argv.data());
      _exit(127);
    }
    close(fds[1]);
    FILE* f = fdopen(fds[0], "r");
    char line[64] = {0};
    if (!f || !fgets(line, sizeof line, f)) throw std::runtime_error("serve printed no port");
    port_ = std::atoi(line);
    out_ = f;
  }
  ~ServeProcess() {
    kill(pid_, SIGTERM);
    int status = 0;
    waitpid(pid_, &status, 0);
    if (out_) fclose(out_);
  }
  int port() const { return port_; }

 private:
  pid_t pid_ = -1;
  int port_ = 0;
  FILE* out_ = nullptr;
};

Outcome service_contract() {
  Checker c;
  t::FixtureServer server;
  t::TempDir dir;
  const std::string uri = server.uri("/articles/contract");
  server.set("/articles/contract", t::CannedResponse{200, t::read_file(t::corpus_dir() / "scholar.html")});
  server.set("/articles/broken", t::CannedResponse{500, "boom", "text/plain"});
  server.set("/articles/slow", t::FixtureServer::Handler([](const httplib::Request&) {
               std::this_thread::sleep_for(std::chrono::milliseconds(2000));
               return t::CannedResponse{200, "<html><title>late</title></html>"};
             }));
  const std::string snapshot = server.uri("/web/20120401000000/") + uri;
  server.set("/wayback/available", t::FixtureServer::Handler([snapshot](const httplib::Request&) {
               gh::json::Json j;
               j["archived_snapshots"]["closest"] = {
                   {"available", true}, {"url", snapshot}, {"timestamp", "20120401000000"}, {"status", "200"}};
               return t::CannedResponse{200, j.dump(), "application/json"};
             }));

  gh::json::Json config;
  config["periodic_interval_minutes"] = 0;
  config["resolve_timeout_ms"] = 1000;
  config["archives"] = gh::json::Json::array(
      {{{"service", "internet_archive"}, {"url_template", server.uri("/wayback/available?url={uri}")},
        {"domains", {"127.0.0.1"}}}});
  std::string config_path = (dir.path() / "config.json").string();
  {
    std::ofstream out(config_path);
    out << config.dump();
  }
  ServeProcess serve({GREYHARVEST_CLI_PATH, "serve", "--port", "0", "--config", config_path, "--data-dir",
                      (dir.path() / "data").string()});
  httplib::Client client("127.0.0.1", serve.port());
  client.set_read_timeout(std::chrono::seconds(10));
  const std::string q = "?uri=" + gh::percent_encode(uri);

  auto bib = client.Get("/api/bibtex" + q);
  c.require(bib && bib->status == 200, "bibtex status");
  auto archives = client.Get("/api/archives" + q);
  c.require(archives && archives->status == 200, "archives status");
  if (archives && archives->status == 200) {
    auto j = gh::json::Json::parse(archives->body, nullptr, false);
    c.require(j.is_array() && j.size() == 1 && j[0].value("snapshot_uri", "") == snapshot,
              "archives body " + archives->body);
  }

  gh::Store store(dir.path() / "data");
  const std::pair<const char*, gh::Format> formats[] = {{"/api/json", gh::Format::kCiteproc},
                                                        {"/api/bibtex", gh::Format::kBibtex},
                                                        {"/api/ris", gh::Format::kRis},
                                                        {"/api/rdf", gh::Format::kTurtle},
                                                        {"/api/wiki", gh::Format::kWiki}};
  for (const auto& [path, format] : formats) {
    auto res = client.Get(std::string(path) + q);
    auto latest = store.get_latest(gh::normalize_uri(uri));
    c.require(res && res->status == 200, std::string(path) + " status");
    c.require(latest && res && res->body == gh::serialize(*latest, format), std::string(path) + " bytes differ");
    c.require(res && res->get_header_value("Content-Type").rfind(std::string(gh::content_type(format)).substr(0, 10), 0) == 0,
              std::string(path) + " content type");
  }
  if (auto latest = store.get_latest(gh::normalize_uri(uri))) {
    auto res = client.Get("/api/bibtex" + q);
    try {
      auto entry = t::parse_bibtex(res->body);
      c.require(entry.fields.count("note") == 1, "bibtex lacks the archive note");
    } catch (const std::exception& e) {
      c.require(false, std::string("bibtex does not parse: ") + e.what());
    }
  }

  auto history = client.Get("/api/history" + q);
  c.require(history && history->status == 200, "history status");
  if (history) {
    auto j = gh::json::Json::parse(history->body, nullptr, false);
    c.require(j.is_array() && !j.empty() && j[0].value("version", 0) == 1, "history body");
  }

  auto purl = store.get_purl_for_uri(gh::normalize_uri(uri));
  c.require(purl.has_value(), "no purl for TCDA record");
  if (purl) {
    auto res = client.Get("/purl/" + purl->id);
    c.require(res && res->status == 302 && res->get_header_value("Location") == gh::normalize_uri(uri), "purl 302");
  }

  auto expect_status = [&](const std::string& path, int status) {
    auto res = client.Get(path);
    c.require(res && res->status == status,
              path + " -> " + (res ? std::to_string(res->status) : std::string("no response")));
    if (res && status >= 400 && res->status == status) {
      auto j = gh::json::Json::parse(res->body, nullptr, false);
      c.require(!j.is_discarded() && j.contains("error") && j.contains("detail"), path + " error body");
    }
  };
  expect_status("/api/json", 400);
  expect_status("/api/json?uri=not-a-uri", 400);
  expect_status("/api/bibtex?uri=" + gh::percent_encode("ftp://example.org/x"), 400);
  expect_status("/purl/zzzzzzzzzzzz", 404);
  expect_status("/api/json?uri=" + gh::percent_encode(server.uri("/articles/broken")), 502);
  expect_status("/api/json?uri=" + gh::percent_encode("http://127.0.0.1:1/unreachable"), 502);
  expect_status("/api/json?uri=" + gh::percent_encode(server.uri("/articles/slow")), 504);
  return c.outcome("all endpoints honour the contract; bytes equal serializer(get_latest)");
}

// Bodies for the fuzz run: random bytes, truncated fixtures, mutated fixtures.
std::vector<std::string> fuzz_bodies(std::size_t count, std::uint64_t seed) {
  std::vector<std::string> seeds;
  for (const auto& p : t::corpus_files()) seeds.push_back(t::read_file(p));
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  const std::string specials = "<>&\"'%=/;#\\\x00\xff\xc3\xe2 \n";
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string body;
    switch (i % 3) {
      case 0: {
        body.resize(pick(2048));
        for (auto& ch : body) ch = static_cast<char>(pick(256));
        if (pick(4) == 0) body = std::string(pick(2) ? "<html>" : "%PDF-1.4\n") + body;
        break;
      }
      case 1: {
        const std::string& s = seeds[pick(seeds.size())];
        body = s.substr(0, pick(s.size() + 1));
        break;
      }
      default: {
        body = seeds[pick(seeds.size())];
        std::size_t edits = 1 + pick(16);
        for (std::size_t e = 0; e < edits && !body.empty(); ++e) {
          std::size_t at = pick(body.size());
          switch (pick(3)) {
            case 0: body[at] = specials[pick(specials.size())]; break;
            case 1: body.insert(at, 1, specials[pick(specials.size())]); break;
            default: body.erase(at, pick(64)); break;
          }
        }
      }
    }
    out.push_back(std::move(body));
  }
  return out;
}

std::string fuzz_digest(const std::vector<std::string>& bodies, const std::vector<gh::SiteRule>& rules,
                        Checker& c, std::size_t& fragments) {
  std::string all;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    std::string acc;
    const char* uris[] = {"http://fuzz.example.org/2012/05/post", "http://ceur-ws.org/Vol-1/paper.pdf"};
    auto doc = gh::make_document(uris[i % 2], bodies[i], {}, gh::make_timestamp(2020, 1, 1));
    run_every_extractor(doc, rules, [&](const gh::MetadataFragment& f) {
      check_letters(c, f, "fuzz body " + std::to_string(i), checked);
      acc += gh::json::encode(f).dump();
      ++fragments;
    });
    gh::ParsedPage page = gh::ParsedPage::parse(doc);
    acc += gh::discover_feed(page).value_or("-");
    acc += gh::extract_author_page_name(page).value_or("-");
    all += gh::sha256_hex(acc);
  }
  return all;
}

Outcome fuzz_robustness() {
  Checker c;
  auto rules = gh::load_site_rules(t::rules_dir());
  std::size_t fragments_a = 0, fragments_b = 0;
  std::string a = fuzz_digest(fuzz_bodies(10000, 777), rules, c, fragments_a);
  std::string b = fuzz_digest(fuzz_bodies(10000, 777), rules, c, fragments_b);
  c.require(a == b && fragments_a == fragments_b, "two runs produced different outputs");
  return c.outcome("10000 bodies x 2 runs, no crash, identical outputs (" + std::to_string(fragments_a) +
                   " fragments per run)");
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::off);
  std::vector<Criterion> criteria = {
      {1, "fixture-corpus extraction", 5, fixture_corpus},
      {2, "letter discipline", 1, letter_discipline},
      {3, "merge determinism", 10, merge_determinism},
      {4, "date heuristic precision/recall", 1, date_heuristic},
      {5, "embedder round-trip", 10, embedder_round_trip},
      {6, "CoINS mismatch block", 1, coins_mismatch},
      {7, "author filtering + sibling inference", 1, sibling_inference},
      {8, "serializer conformance", 5, serializer_conformance},
      {9, "canonical tracking end-to-end", 5, canonical_tracking},
      {10, "archive gating", 2, archive_gating},
      {11, "service contract", 10, service_contract},
      {12, "robustness fuzz", 60, fuzz_robustness},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > cr.limit_seconds) {
      o.pass = false;
      o.detail += " [exceeded time limit]";
    }
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2f s / limit %.0f s", secs, cr.limit_seconds);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  AC" << (cr.id < 10 ? "0" : "") << cr.id << "  " << cr.name
              << "  (" << timing << ")  " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
