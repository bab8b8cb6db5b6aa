#pragma once

// Seeded generators for property tests.

#include <random>
#include <string>
#include <vector>

#include "greyharvest/model.hpp"

namespace greyharvest::testing {

class RecordGenerator {
 public:
  explicit RecordGenerator(std::uint64_t seed) : rng_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64& rng() { return rng_; }

  /// Single-spaced text without leading or trailing blanks, mixing ASCII
  /// letters, markup-significant punctuation and multi-byte characters.
  std::string text(int min_words, int max_words) {
    static const std::vector<std::string> kPieces = {
        "grey", "Literature", "web", "Archive", "métadonnées", "Über", "链接", "naïve",
        "R&D", "<b>", "\"quoted\"", "it's", "{braces}", "50%", "back\\slash", "a|b",
        "#tag", "$5", "x_y", "~", "^", "—", "Ωmega", "C++", "a=b", "path/to", "?q", "+plus"};
    int n = uniform(min_words, max_words);
    std::string out;
    for (int i = 0; i < n; ++i) {
      if (i) out.push_back(' ');
      out += kPieces[static_cast<std::size_t>(uniform(0, static_cast<int>(kPieces.size()) - 1))];
    }
    return out;
  }

  std::string name_part() {
    static const std::vector<std::string> kNames = {"Ada", "Lord", "Marshall", "Zoë", "José", "Ng",
                                                    "O'Brien", "Smith-Jones", "Łukasz", "Björk", "Kim",
                                                    "van", "Quinn", "Émile", "Zhang"};
    return kNames[static_cast<std::size_t>(uniform(0, static_cast<int>(kNames.size()) - 1))];
  }

  Person person() {
    if (coin()) return Person::from_literal(name_part() + ", " + name_part());
    return Person::from_literal(name_part() + " " + name_part());
  }

  PartialDate date() {
    int year = uniform(1995, 2019);
    switch (uniform(0, 2)) {
      case 0: return *PartialDate::make(year, std::nullopt, std::nullopt);
      case 1: return *PartialDate::make(year, uniform(1, 12), std::nullopt);
      default: {
        int month = uniform(1, 12);
        return *PartialDate::make(year, month, uniform(1, days_in_month(year, month)));
      }
    }
  }

  std::string uri(int n) {
    return "http://site" + std::to_string(n) + ".example.org/posts/" + std::to_string(uniform(1, 99999)) +
           (coin() ? "/" : "?p=" + std::to_string(uniform(1, 999)));
  }

  /// A record with title, container, date and at least one author.
  BibRecord tcda_record(int n) {
    BibRecord r;
    r.uri = uri(n);
    r.title = text(1, 8);
    r.container = text(1, 4);
    r.issued = date();
    int authors = uniform(1, 4);
    for (int i = 0; i < authors; ++i) r.authors.push_back(person());
    r.retrieved_at = make_timestamp(2020, uniform(1, 12), uniform(1, 28));
    return r;
  }

  /// Any subset of fields, sometimes with a canonical URI and archives.
  BibRecord any_record(int n) {
    BibRecord r = tcda_record(n);
    if (coin(0.2)) r.title.reset();
    if (coin(0.2)) r.container.reset();
    if (coin(0.2)) r.issued.reset();
    if (coin(0.2)) r.authors.clear();
    if (coin(0.3)) r.canonical_uri = uri(n + 1000);
    if (coin(0.3)) {
      ArchiveSnapshot s;
      s.snapshot_uri = "http://web.archive.org/web/20120101000000/" + r.uri;
      s.snapshot_time = make_timestamp(2012, 1, 1);
      r.archives.push_back(s);
    }
    return r;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace greyharvest::testing
