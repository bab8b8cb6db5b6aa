#include <doctest.h>

#include "greyharvest/json_codec.hpp"
#include "greyharvest/serializers.hpp"
#include "greyharvest/text.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace greyharvest;

namespace {

BibRecord sample() {
  BibRecord r;
  r.uri = "http://blog.example.org/2012/04/01/grey/";
  r.title = "Grey {Literature} & 50% Web";
  r.authors = {Person::from_literal("Phillip Lord"), Person::from_literal("Marshall, Lindsay")};
  r.issued = PartialDate::make(2012, 4, 1);
  r.container = "Russet";
  r.retrieved_at = make_timestamp(2012, 4, 2, 9, 0, 0);
  ArchiveSnapshot s;
  s.snapshot_uri = "http://web.archive.org/web/20120402000000/http://blog.example.org/2012/04/01/grey/";
  s.snapshot_time = make_timestamp(2012, 4, 2);
  r.archives.push_back(s);
  return r;
}

}  // namespace

TEST_SUITE("serializers") {
  TEST_CASE("citeproc golden") {
    CHECK(to_citeproc(sample()) ==
          R"({"id":"http://blog.example.org/2012/04/01/grey/","type":"webpage","title":"Grey {Literature} & 50% Web",)"
          R"("author":[{"family":"Lord","given":"Phillip"},{"family":"Marshall","given":"Lindsay"}],)"
          R"("container-title":"Russet","issued":{"date-parts":[[2012,4,1]]},"URL":"http://blog.example.org/2012/04/01/grey/"})");
  }

  TEST_CASE("bibtex golden") {
    CHECK(to_bibtex(sample()) ==
          "@misc{blog.example.org_c2034472,\n"
          "  title = {Grey \\{Literature\\} \\& 50\\% Web},\n"
          "  author = {Phillip Lord and Marshall, Lindsay},\n"
          "  year = {2012},\n"
          "  month = apr,\n"
          "  howpublished = {\\url{http://blog.example.org/2012/04/01/grey/}},\n"
          "  note = {Archived at: http://web.archive.org/web/20120402000000/http://blog.example.org/2012/04/01/grey/},\n"
          "}\n");
  }

  TEST_CASE("ris golden") {
    CHECK(to_ris(sample()) ==
          "TY  - ELEC\r\n"
          "TI  - Grey {Literature} & 50% Web\r\n"
          "AU  - Lord, Phillip\r\n"
          "AU  - Marshall, Lindsay\r\n"
          "PY  - 2012/04/01/\r\n"
          "T2  - Russet\r\n"
          "UR  - http://blog.example.org/2012/04/01/grey/\r\n"
          "ER  - \r\n");
  }

  TEST_CASE("turtle golden") {
    CHECK(to_dc_rdf(sample()) ==
          "@prefix dc: <http://purl.org/dc/elements/1.1/> .\n\n"
          "<http://blog.example.org/2012/04/01/grey/>\n"
          "    dc:identifier \"http://blog.example.org/2012/04/01/grey/\" ;\n"
          "    dc:title \"Grey {Literature} & 50% Web\" ;\n"
          "    dc:creator \"Phillip Lord\" ;\n"
          "    dc:creator \"Marshall, Lindsay\" ;\n"
          "    dc:date \"2012-04-01\" ;\n"
          "    dc:publisher \"Russet\" .\n");
  }

  TEST_CASE("wiki golden") {
    CHECK(to_wiki_cite(sample()) ==
          "{{cite web |url=http://blog.example.org/2012/04/01/grey/ |title=Grey &#123;Literature&#125; & 50% Web"
          " |author=Phillip Lord |author2=Marshall, Lindsay |date=2012-04-01 |website=Russet |access-date=2012-04-02}}");
  }

  TEST_CASE("canonical uri is the link everywhere but the identifier") {
    BibRecord r = sample();
    r.canonical_uri = "http://russet.example.org/grey";
    CHECK(json::Json::parse(to_citeproc(r))["URL"] == "http://russet.example.org/grey");
    CHECK(json::Json::parse(to_citeproc(r))["id"] == r.uri);
    CHECK(to_ris(r).find("UR  - http://russet.example.org/grey\r\n") != std::string::npos);
    CHECK(to_wiki_cite(r).find("|url=http://russet.example.org/grey ") != std::string::npos);
    CHECK(to_dc_rdf(r).find("dc:relation <http://russet.example.org/grey>") != std::string::npos);
  }

  TEST_CASE("minimal record") {
    BibRecord r;
    r.uri = "http://a.org/";
    CHECK(to_ris(r) == "TY  - ELEC\r\nUR  - http://a.org/\r\nER  - \r\n");
    auto j = json::Json::parse(to_citeproc(r));
    CHECK(j.size() == 3);
    CHECK(testing::parse_bibtex(to_bibtex(r)).fields.size() == 1);
    CHECK(testing::TurtleParser(to_dc_rdf(r)).parse().size() == 1);
  }

  TEST_CASE("format names and content types") {
    CHECK(format_from_string("json") == Format::kCiteproc);
    CHECK(format_from_string("BibTeX") == Format::kBibtex);
    CHECK(format_from_string("rdf") == Format::kTurtle);
    CHECK_FALSE(format_from_string("xml").has_value());
    CHECK(content_type(Format::kCiteproc) == "application/json");
    CHECK(content_type(Format::kTurtle).substr(0, 11) == "text/turtle");
    CHECK(serialize(sample(), Format::kRis) == to_ris(sample()));
  }

  TEST_CASE("bibtex keys are host plus hash prefix") {
    CHECK(bibtex_key("http://blog.example.org/2012/04/01/grey/") == "blog.example.org_c2034472");
    CHECK(bibtex_key("not a uri").substr(0, 4) == "uri_");
  }

  TEST_CASE("property: serializers agree with independent parsers") {
    testing::RecordGenerator gen(2024);
    for (int i = 0; i < 300; ++i) {
      BibRecord r = gen.any_record(i);
      CAPTURE(i);
      const std::string link = r.canonical_uri ? *r.canonical_uri : r.uri;

      auto bib = testing::parse_bibtex(to_bibtex(r));
      CHECK(bib.key == bibtex_key(r.uri));
      CHECK(bib.fields["howpublished"] == link);
      if (r.title) CHECK(bib.fields["title"] == *r.title);
      if (!r.authors.empty()) {
        std::vector<std::string> names;
        for (const auto& p : r.authors) names.push_back(p.literal);
        CHECK(bib.fields["author"] == text::join(names, " and "));
      }

      auto triples = testing::TurtleParser(to_dc_rdf(r)).parse();
      std::size_t creators = 0;
      for (const auto& t : triples) {
        if (t.predicate == "<http://purl.org/dc/elements/1.1/creator>") ++creators;
        if (t.predicate == "<http://purl.org/dc/elements/1.1/title>") CHECK(t.object == "\"" + *r.title + "\"");
      }
      CHECK(creators == r.authors.size());

      auto cp = json::Json::parse(to_citeproc(r));
      CHECK(cp["URL"] == link);
      if (r.title) CHECK(cp["title"] == *r.title);

      std::string ris = to_ris(r);
      CHECK(ris.find("\r\nER  - \r\n") == ris.size() - 10);
      for (const auto& line : text::split(ris.substr(0, ris.size() - 2), "\r\n")) {
        CHECK(line.size() >= 6);
        CHECK(line.substr(2, 4) == "  - ");
        CHECK(line.find('\n') == std::string::npos);
      }

      std::string wiki = to_wiki_cite(r);
      CHECK(wiki.find('\n') == std::string::npos);
      // Every '|' is a parameter separator; values never contain a bare one.
      std::size_t pipes = std::count(wiki.begin(), wiki.end(), '|');
      std::size_t params = 2 + (r.title ? 1 : 0) + r.authors.size() + (r.issued ? 1 : 0) + (r.container ? 1 : 0);
      CHECK(pipes == params);
    }
  }

  TEST_CASE("line breaks never leak into line formats") {
    BibRecord r;
    r.uri = "http://a.org/";
    r.title = "two\nlines\r\nhere";
    CHECK(to_ris(r).find("TI  - two lines  here\r\n") != std::string::npos);
    CHECK(to_wiki_cite(r).find('\n') == std::string::npos);
    CHECK(to_bibtex(r).find("two lines") != std::string::npos);
    auto triples = testing::TurtleParser(to_dc_rdf(r)).parse();
    bool found = false;
    for (const auto& t : triples) found |= t.object == "\"two\nlines\r\nhere\"";
    CHECK(found);
  }
}
