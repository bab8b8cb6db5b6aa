#include <doctest.h>

#include <algorithm>
#include <random>

#include "greyharvest/error.hpp"
#include "greyharvest/json_codec.hpp"
#include "greyharvest/resolver.hpp"
#include "greyharvest/store.hpp"
#include "support/corpus.hpp"
#include "support/generators.hpp"
#include "support/temp_dir.hpp"

using namespace greyharvest;

namespace {

MetadataFragment frag(SourceKind source, FieldValues fields, Timestamp at = make_timestamp(2020, 1, 1)) {
  MetadataFragment f;
  f.source = source;
  f.fields = std::move(fields);
  f.score = ScoreTable::defaults().score(source, f.fields);
  f.observed_at = at;
  return f;
}

FieldValues titled(const std::string& t) {
  FieldValues v;
  v.title = t;
  return v;
}

std::string html_page(const std::string& head, const std::string& body = "") {
  return "<!DOCTYPE html><html><head><meta charset=utf-8>" + head + "</head><body>" + body + "</body></html>";
}

// Independent per-field winner: highest weight, then the earlier source
// kind, then the newer observation, then the smaller encoded value.
std::optional<std::string> oracle_title(const std::vector<MetadataFragment>& fs) {
  const MetadataFragment* best = nullptr;
  for (const auto& f : fs) {
    if (!f.fields.title) continue;
    if (!best) {
      best = &f;
      continue;
    }
    int w = ScoreTable::defaults().weight(f.source, Field::kTitle);
    int bw = ScoreTable::defaults().weight(best->source, Field::kTitle);
    auto key = std::make_tuple(-w, static_cast<int>(f.source), -f.observed_at.time_since_epoch().count(), *f.fields.title);
    auto bkey = std::make_tuple(-bw, static_cast<int>(best->source), -best->observed_at.time_since_epoch().count(),
                                *best->fields.title);
    if (key < bkey) best = &f;
  }
  return best ? best->fields.title : std::nullopt;
}

}  // namespace

TEST_SUITE("scoring") {
  TEST_CASE("default weights follow the published table") {
    const auto& t = ScoreTable::defaults();
    CHECK(t.weight(SourceKind::kGoogleScholar, Field::kTitle) == 90);
    CHECK(t.weight(SourceKind::kOgp, Field::kTitle) == 80);
    CHECK(t.weight(SourceKind::kSiteRule, Field::kTitle) == 75);
    CHECK(t.weight(SourceKind::kRss, Field::kIssued) == 70);
    CHECK(t.weight(SourceKind::kSchemaOrg, Field::kTitle) == 60);
    CHECK(t.weight(SourceKind::kMeta, Field::kAuthors) == 50);
    CHECK(t.weight(SourceKind::kTwitter, Field::kTitle) == 40);
    CHECK(t.weight(SourceKind::kTwitter, Field::kAuthors) == 20);
    CHECK(t.weight(SourceKind::kPdf, Field::kTitle) == 35);
    CHECK(t.weight(SourceKind::kHtmlTitle, Field::kTitle) == 30);
    CHECK(t.weight(SourceKind::kFeedInference, Field::kAuthors) == 20);
    CHECK(t.weight(SourceKind::kUriDate, Field::kIssued) == 10);
    for (SourceKind k : all_source_kinds()) {
      for (Field f : kAllFields) {
        if (!grants(k, f)) CHECK(t.weight(k, f) == 0);
      }
    }
  }

  TEST_CASE("overlay from json") {
    auto t = ScoreTable::from_json(json::Json::parse(
        R"({"weights":{"html-title":95,"twitter":{"authors":45}},"author_blocklist":["Editor"],"title_delimiters":[" ~ "]})"));
    CHECK(t.weight(SourceKind::kHtmlTitle, Field::kTitle) == 95);
    CHECK(t.weight(SourceKind::kTwitter, Field::kAuthors) == 45);
    CHECK(t.weight(SourceKind::kTwitter, Field::kTitle) == 40);
    CHECK(t.author_blocklist().count("editor") + t.author_blocklist().count("Editor") == 1);
    CHECK(t.title_delimiters() == std::vector<std::string>{" ~ "});
    // Weights can never grant a letter the source lacks.
    auto u = ScoreTable::from_json(json::Json::parse(R"({"weights":{"prism":99}})"));
    CHECK(u.weight(SourceKind::kPrism, Field::kTitle) == 0);
    CHECK(u.weight(SourceKind::kPrism, Field::kContainer) == 99);
  }

  TEST_CASE("overlay errors") {
    for (const char* bad : {R"({"weights":{"nope":1}})", R"({"weights":{"ogp":-1}})", R"({"weights":{"ogp":{"colour":1}}})",
                            R"({"title_delimiters":[""]})", R"({"author_blocklist":[1]})", "[]"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS(ScoreTable::from_json(json::Json::parse(bad)), ConfigError);
    }
  }
}

TEST_SUITE("resolver") {
  TEST_CASE("merge prefers weight, then source order") {
    std::vector<MetadataFragment> fs = {frag(SourceKind::kHtmlTitle, titled("html")),
                                        frag(SourceKind::kOgp, titled("ogp")),
                                        frag(SourceKind::kDublinCore, titled("dc")),
                                        frag(SourceKind::kGoogleScholar, titled("gs"))};
    auto r = merge(fs, ScoreTable::defaults(), "http://a.org/", make_timestamp(2020, 1, 1));
    CHECK(r.title == "gs");  // GS and DC tie at 90; GS is declared first
    CHECK(r.provenance.at(Field::kTitle) == SourceKind::kGoogleScholar);
  }

  TEST_CASE("merge tie-break: newer observation, then smaller value") {
    std::vector<MetadataFragment> fs = {frag(SourceKind::kRss, titled("old"), make_timestamp(2019, 1, 1)),
                                        frag(SourceKind::kRss, titled("new"), make_timestamp(2020, 1, 1))};
    CHECK(merge(fs, ScoreTable::defaults(), "http://a.org/", {}).title == "new");
    fs = {frag(SourceKind::kRss, titled("b")), frag(SourceKind::kRss, titled("a"))};
    CHECK(merge(fs, ScoreTable::defaults(), "http://a.org/", {}).title == "a");
  }

  TEST_CASE("merge drops blocklisted authors before they compete") {
    FieldValues admin;
    admin.authors = {Person::from_literal("admin")};
    FieldValues real;
    real.authors = {Person::from_literal("Real Person")};
    std::vector<MetadataFragment> fs = {frag(SourceKind::kMeta, admin), frag(SourceKind::kTwitter, real)};
    auto r = merge(fs, ScoreTable::defaults(), "http://a.org/", {});
    REQUIRE(r.authors.size() == 1);
    CHECK(r.authors[0].literal == "Real Person");
    CHECK(r.provenance.at(Field::kAuthors) == SourceKind::kTwitter);
  }

  TEST_CASE("property: merge matches the oracle and ignores order") {
    testing::RecordGenerator gen(99);
    std::vector<SourceKind> title_sources;
    for (SourceKind k : all_source_kinds()) {
      if (grants(k, Field::kTitle)) title_sources.push_back(k);
    }
    for (int round = 0; round < 200; ++round) {
      std::vector<MetadataFragment> fs;
      int n = gen.uniform(1, 8);
      for (int i = 0; i < n; ++i) {
        SourceKind k = title_sources[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(title_sources.size()) - 1))];
        FieldValues v;
        v.title = gen.text(1, 2);
        if (grants(k, Field::kContainer) && gen.coin()) v.container = gen.text(1, 2);
        fs.push_back(frag(k, v, make_timestamp(2020, 1, gen.uniform(1, 3))));
      }
      auto base = merge(fs, ScoreTable::defaults(), "http://a.org/", {});
      CHECK(base.title == oracle_title(fs));
      std::shuffle(fs.begin(), fs.end(), gen.rng());
      CHECK(merge(fs, ScoreTable::defaults(), "http://a.org/", {}) == base);
    }
  }

  TEST_CASE("site-name stripping") {
    CHECK(strip_site_title("On Link Rot | Grey Blog", std::string("Grey Blog"), "blog.example.org") == "On Link Rot");
    CHECK(strip_site_title("Grey Blog | On Link Rot", std::string("Grey Blog"), "blog.example.org") == "On Link Rot");
    CHECK(strip_site_title("On Link Rot - example.org", std::nullopt, "www.example.org") == "On Link Rot");
    CHECK(strip_site_title("Apples - Oranges", std::string("Grey Blog"), "blog.example.org") == "Apples - Oranges");
    CHECK(strip_site_title("Grey Blog", std::string("Grey Blog"), "blog.example.org") == "Grey Blog");
    CHECK(strip_site_title(" | Grey Blog", std::string("Grey Blog"), "x.org") == " | Grey Blog");
  }

  TEST_CASE("author filtering is case-insensitive") {
    auto kept = filter_authors({Person::from_literal("Admin"), Person::from_literal("Ann One"),
                                Person::from_literal("WEBMASTER")},
                               ScoreTable::defaults().author_blocklist());
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].literal == "Ann One");
  }

  TEST_CASE("sibling inference requires unanimity and never infers dates") {
    auto entry = [](const std::string& uri, std::vector<std::string> authors) {
      FieldValues v;
      v.title = "t";
      v.issued = PartialDate::make(2012, 1, 1);
      for (auto& a : authors) v.authors.push_back(Person::from_literal(a));
      return FeedEntry{uri, frag(SourceKind::kRss, v)};
    };
    FeedExtraction feed;
    feed.info.container = "Feed Title";
    feed.entries = {entry("http://a.org/1", {"admin"}), entry("http://a.org/2", {"A One"}),
                    entry("http://a.org/3", {"A One"}), entry("http://a.org/4", {})};
    auto f = infer_from_siblings("http://a.org/1", feed, ScoreTable::defaults().author_blocklist(), {});
    REQUIRE(f.has_value());
    CHECK(f->source == SourceKind::kFeedInference);
    REQUIRE(f->fields.authors.size() == 1);
    CHECK(f->fields.authors[0].literal == "A One");
    CHECK_FALSE(f->fields.issued.has_value());

    feed.entries.push_back(entry("http://a.org/5", {"B Two"}));
    auto split = infer_from_siblings("http://a.org/1", feed, ScoreTable::defaults().author_blocklist(), {});
    CHECK((!split || split->fields.authors.empty()));

    feed.entries.pop_back();
    feed.entries[0] = entry("http://a.org/1", {"Own Author"});
    auto own = infer_from_siblings("http://a.org/1", feed, ScoreTable::defaults().author_blocklist(), {});
    CHECK((!own || own->fields.authors.empty()));
  }

  TEST_CASE("resolve follows feeds and author pages") {
    MapSource source;
    const std::string uri = "http://blog.example.org/2012/04/post/";
    source.add(uri, html_page("<title>Post | Blog</title>"
                              "<meta property=\"article:author\" content=\"http://blog.example.org/about\">"
                              "<link rel=alternate type=application/rss+xml href=/feed>"));
    source.add("http://blog.example.org/about", html_page("<meta property=\"og:title\" content=\"Ann Author\">"));
    source.add("http://blog.example.org/feed",
               "<rss version=\"2.0\"><channel><title>Blog</title><item><title>Post</title>"
               "<link>http://blog.example.org/2012/04/post/</link><pubDate>Mon, 02 Apr 2012 00:00:00 +0000</pubDate>"
               "</item></channel></rss>",
               {{"content-type", "application/rss+xml"}});
    Resolver resolver(source, ResolverOptions{}, nullptr, testing::fixed_clock());
    auto trace = resolver.resolve_traced(uri);
    const auto& r = trace.record;
    CHECK(r.title == "Post");
    CHECK(r.container == "Blog");
    CHECK(r.issued == PartialDate::make(2012, 4, 2));
    REQUIRE(r.authors.size() == 1);
    CHECK(r.authors[0].literal == "Ann Author");
    CHECK(r.provenance.at(Field::kIssued) == SourceKind::kRss);
    CHECK(classify(r) == Completeness::kTcda);
    CHECK(source.fetch_count() == 3);
  }

  TEST_CASE("secondary failures degrade to warnings") {
    MapSource source;
    const std::string uri = "http://blog.example.org/p";
    source.add(uri, html_page("<title>Only Title</title><link rel=alternate type=application/atom+xml href=/gone>"));
    Resolver resolver(source, ResolverOptions{}, nullptr, testing::fixed_clock());
    auto trace = resolver.resolve_traced(uri);
    CHECK(trace.record.title == "Only Title");
    CHECK_FALSE(trace.warnings.empty());
  }

  TEST_CASE("primary fetch errors propagate") {
    MapSource source;
    Resolver resolver(source, ResolverOptions{}, nullptr, testing::fixed_clock());
    CHECK_THROWS_AS(resolver.resolve("http://nowhere.example.org/"), FetchError);
    CHECK_THROWS_AS(resolver.resolve("gopher://x/"), UnsupportedScheme);
  }

  TEST_CASE("options can disable secondary fetches") {
    MapSource source;
    const std::string uri = "http://blog.example.org/p";
    source.add(uri, html_page("<title>T</title><link rel=alternate type=application/rss+xml href=/feed>"
                              "<meta property=\"article:author\" content=\"http://blog.example.org/about\">"));
    ResolverOptions options;
    options.follow_feeds = false;
    options.follow_author_pages = false;
    Resolver resolver(source, options, nullptr, testing::fixed_clock());
    resolver.resolve(uri);
    CHECK(source.fetch_count() == 1);
  }

  TEST_CASE("with a store, versions are written only on change and feed entries persist") {
    testing::TempDir dir;
    Store store(dir.path());
    MapSource source;
    const std::string uri = "http://blog.example.org/2012/04/post/";
    const std::string feed =
        "<rss version=\"2.0\"><channel><title>Blog</title><item><title>Post</title>"
        "<link>http://blog.example.org/2012/04/post/</link><dc:creator xmlns:dc=\"http://purl.org/dc/elements/1.1/\">"
        "Ann</dc:creator></item></channel></rss>";
    source.add(uri, html_page("<title>Post</title><link rel=alternate type=application/rss+xml href=/feed>"));
    source.add("http://blog.example.org/feed", feed, {{"content-type", "application/rss+xml"}});
    Resolver resolver(source, ResolverOptions{}, &store, testing::fixed_clock());
    auto first = resolver.resolve_traced(uri);
    CHECK(first.stored_version == 1u);
    auto second = resolver.resolve_traced(uri);
    CHECK_FALSE(second.stored_version.has_value());
    CHECK(store.get_history(uri).size() == 1);

    // The entry drops out of the feed; what was observed still counts.
    source.add("http://blog.example.org/feed", "<rss version=\"2.0\"><channel><title>Blog</title></channel></rss>",
               {{"content-type", "application/rss+xml"}});
    auto third = resolver.resolve_traced(uri);
    REQUIRE(third.record.authors.size() == 1);
    CHECK(third.record.authors[0].literal == "Ann");
    CHECK(store.get_history(uri).size() == 1);
  }

  TEST_CASE("pdf documents use link context from the parent index") {
    MapSource source;
    source.add("http://ceur-ws.org/Vol-9/",
               html_page("<span class=CEURVOLTITLE>Proc. Nine</span><span class=CEURPUBDATE>2010-09-01</span>",
                         "<ul><li><a href=p1.pdf><span class=CEURTITLE>Paper One</span></a>"
                         "<span class=CEURAUTHOR>Ann One</span></li></ul>"));
    source.add("http://ceur-ws.org/Vol-9/p1.pdf", "%PDF-1.4\ntrailer << /Info << /Title (untitled) >> >>\n");
    ResolverOptions options = testing::corpus_options();
    Resolver resolver(source, options, nullptr, testing::fixed_clock());
    auto r = resolver.resolve("http://ceur-ws.org/Vol-9/p1.pdf");
    CHECK(r.title == "Paper One");
    CHECK(r.container == "Proc. Nine");
    CHECK(r.issued == PartialDate::make(2010, 9, 1));
    CHECK(classify(r) == Completeness::kTcda);
  }
}
