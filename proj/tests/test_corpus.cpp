#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "polyscale/corpus/corpus.hpp"
#include "polyscale/corpus/label_scheme.hpp"
#include "polyscale/corpus/rile.hpp"
#include "polyscale/corpus/segment.hpp"
#include "polyscale/error.hpp"

using namespace polyscale;
using namespace polyscale::corpus;

namespace {

// Counts polarities straight from the scheme file rows, not through LabelScheme.
double counting_rile(const std::vector<std::string>& labels,
                     const std::map<std::string, std::string>& polarity) {
  int left = 0, right = 0;
  for (const auto& l : labels) {
    const auto& p = polarity.at(l);
    if (p == "LEFT") ++left;
    if (p == "RIGHT") ++right;
  }
  return static_cast<double>(right - left) / static_cast<double>(labels.size());
}

std::map<std::string, std::string> scheme_file_polarities() {
  std::ifstream in(std::string(POLYSCALE_DATA_DIR) + "/cmp_scheme.tsv");
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string code, cat, pol;
    std::getline(ls, code, '\t');
    std::getline(ls, cat, '\t');
    std::getline(ls, pol, '\t');
    out[code] = pol;
  }
  return out;
}

const char* kTwoDocs =
    R"({"id":"a","party_id":"p1","country":"uk","language":"en","election_date":"2001-06-07","rile":-12.5,"sentences":[{"text":"We will cut taxes.","code":"402"},{"text":"Peace matters.","code":"106"},{"text":"Schools first.","code":"506"},{"text":"More police.","code":"605"},{"text":"Clean air.","code":"501"}]}
{"id":"b","party_id":"p2","country":"uk","language":"en","election_date":"2001-06-07","ches":6.5,"sentences":[{"text":"One."},{"text":"Two."},{"text":"Three."},{"text":"Four."},{"text":"Five."}]}
)";

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("default scheme cardinalities") {
  const auto s = LabelScheme::cmp_default();
  CHECK(s.size() == 57);
  std::size_t l = 0, r = 0, n = 0;
  for (const auto& c : s.codes()) {
    l += c.polarity == Polarity::Left;
    r += c.polarity == Polarity::Right;
    n += c.polarity == Polarity::Neutral;
  }
  CHECK(l == 13);
  CHECK(r == 13);
  CHECK(n == 31);
}

TEST_CASE("shipped scheme file matches the built-in scheme") {
  CHECK(LabelScheme::load(std::string(POLYSCALE_DATA_DIR) + "/cmp_scheme.tsv") ==
        LabelScheme::cmp_default());
}

TEST_CASE("polarity_of") {
  const auto s = LabelScheme::cmp_default();
  CHECK(s.polarity_of("105") == Polarity::Left);  // military: negative
  CHECK(s.polarity_of("104") == Polarity::Right);
  CHECK(s.polarity_of("101") == Polarity::Neutral);
  CHECK_THROWS_WITH_AS(s.polarity_of("999"), "unknown code 999", ValidationError);
}

TEST_CASE("scheme with 12 LEFT codes is rejected") {
  auto codes = LabelScheme::cmp_default().codes();
  for (auto& c : codes) {
    if (c.polarity == Polarity::Left) {
      c.polarity = Polarity::Neutral;
      break;
    }
  }
  CHECK_THROWS_AS(LabelScheme{codes}, ValidationError);
}

TEST_CASE("compute_rile examples") {
  const auto s = LabelScheme::cmp_default();
  std::vector<std::string> neutral(10, "101");
  CHECK(compute_rile(neutral, s) == 0.0);
  std::vector<std::string> mix = {"104", "104", "104", "104", "105",
                                  "101", "101", "101", "101", "101"};
  CHECK(compute_rile(mix, s) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(compute_rile(std::vector<std::string>(3, "104"), s) == 1.0);
  CHECK(compute_rile(std::vector<std::string>(3, "105"), s) == -1.0);
  CHECK_THROWS_AS(compute_rile(std::vector<std::string>{}, s), ValidationError);
  CHECK_THROWS_AS(compute_rile(std::vector<std::string>{"999"}, s), ValidationError);
}

TEST_CASE("compute_rile against the counting oracle, permutations and swaps") {
  const auto s = LabelScheme::cmp_default();
  const auto swapped = s.with_swapped_polarity();
  const auto pol = scheme_file_polarities();
  REQUIRE(pol.size() == 57);
  std::vector<std::string> codes;
  for (const auto& [c, _] : pol) codes.push_back(c);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> labels(1 + rng() % 40);
    for (auto& l : labels) l = codes[rng() % codes.size()];
    const double r = compute_rile(labels, s);
    CHECK(r == counting_rile(labels, pol));
    CHECK(compute_rile(labels, swapped) == -r);
    std::shuffle(labels.begin(), labels.end(), rng);
    CHECK(compute_rile(labels, s) == r);
  }
}

TEST_CASE("raw RILE scaling") {
  CHECK(rile_from_raw(-100.0) == -1.0);
  CHECK(rile_from_raw(30.0) == doctest::Approx(0.3));
  CHECK(rile_to_raw(rile_from_raw(42.0)) == doctest::Approx(42.0));
}

TEST_CASE("segment splits on terminal punctuation") {
  const auto s = segment("A. B.", "en");
  REQUIRE(s.size() == 2);
  CHECK(s[0].position == 1);
  CHECK(s[1].position == 2);
  CHECK(s[0].tokens == std::vector<std::string>{"a"});
}

TEST_CASE("segment keeps abbreviations and splits verb-bearing semicolon clauses") {
  // By hand: no break after "e.g."; the ';' has "will" on the left and "must"
  // on the right, so it splits; the second ';' has no verb on the right.
  const auto s = segment("We will invest, e.g. in rail; taxes must fall. Jobs; growth.", "en");
  REQUIRE(s.size() == 3);
  CHECK(s[0].text == "We will invest, e.g. in rail;");
  CHECK(s[1].text == "taxes must fall.");
  CHECK(s[2].text == "Jobs; growth.");
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i].position == static_cast<int>(i + 1));
}

TEST_CASE("segment rejects empty text") {
  CHECK_THROWS_AS(segment("   ", "en"), ValidationError);
}

TEST_CASE("tokenize lowercases and splits on punctuation") {
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("Müller's plan") == std::vector<std::string>{"müller", "s", "plan"});
}

TEST_CASE("load corpus with two manifestos") {
  std::istringstream in(kTwoDocs);
  const auto c = parse_corpus(in, LabelScheme::cmp_default());
  REQUIRE(c.size() == 2);
  CHECK(c[0].sentences.size() == 5);
  CHECK(c[1].sentences.size() == 5);
  CHECK(c.annotated_count() == 1);
  CHECK(c[0].rile_gold == doctest::Approx(-0.125));
  CHECK_FALSE(c[1].rile_gold.has_value());
  CHECK(c[1].ches_gold == doctest::Approx(6.5));
  CHECK(c.annotated_count() <= c.size());
}

TEST_CASE("pre-segmented input bypasses the splitter") {
  std::istringstream in(
      R"({"id":"x","party_id":"p","country":"uk","language":"en","election_date":"2001-01-01","sentences":[{"text":"One. Two. Three."}]})");
  const auto c = parse_corpus(in, LabelScheme::cmp_default());
  CHECK(c[0].sentences.size() == 1);
}

TEST_CASE("raw text goes through the segmenter") {
  std::istringstream in(
      R"({"id":"x","party_id":"p","country":"uk","language":"en","election_date":"2001-01-01","text":"One. Two. Three."})");
  const auto c = parse_corpus(in, LabelScheme::cmp_default());
  CHECK(c[0].sentences.size() == 3);
}

TEST_CASE("loader errors name the line and the code") {
  std::istringstream bad_code(
      "\n"
      R"({"id":"x","party_id":"p","country":"uk","language":"en","election_date":"2001-01-01","sentences":[{"text":"a","code":"999"}]})");
  CHECK_THROWS_WITH_AS(parse_corpus(bad_code, LabelScheme::cmp_default(), {}, "f.jsonl"),
                       doctest::Contains("f.jsonl:2: unknown code 999"), ValidationError);
  std::istringstream malformed("{not json");
  CHECK_THROWS_WITH_AS(parse_corpus(malformed, LabelScheme::cmp_default(), {}, "f.jsonl"),
                       doctest::Contains("f.jsonl:1:"), ValidationError);
  std::istringstream lang(
      R"({"id":"x","party_id":"p","country":"jp","language":"ja","election_date":"2001-01-01","sentences":[{"text":"a"}]})");
  CHECK_THROWS_WITH_AS(parse_corpus(lang, LabelScheme::cmp_default()),
                       doctest::Contains("unknown language tag ja"), ValidationError);
}

TEST_CASE("write then parse reproduces every field") {
  std::istringstream in(kTwoDocs);
  const auto c = parse_corpus(in, LabelScheme::cmp_default());
  std::ostringstream out;
  write_corpus(c, out);
  std::istringstream back(out.str());
  const auto d = parse_corpus(back, LabelScheme::cmp_default());
  REQUIRE(d.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(d[i].id == c[i].id);
    CHECK(d[i].party_id == c[i].party_id);
    CHECK(d[i].country == c[i].country);
    CHECK(d[i].language == c[i].language);
    CHECK(d[i].election_date == c[i].election_date);
    CHECK(d[i].rile_gold == c[i].rile_gold);
    CHECK(d[i].ches_gold == c[i].ches_gold);
    REQUIRE(d[i].sentences.size() == c[i].sentences.size());
    for (std::size_t j = 0; j < c[i].sentences.size(); ++j) {
      CHECK(d[i].sentences[j].text == c[i].sentences[j].text);
      CHECK(d[i].sentences[j].tokens == c[i].sentences[j].tokens);
      CHECK(d[i].sentences[j].gold_code == c[i].sentences[j].gold_code);
      CHECK(d[i].sentences[j].position == c[i].sentences[j].position);
    }
  }
  std::ostringstream again;
  write_corpus(d, again);
  CHECK(again.str() == out.str());
}

}  // TEST_SUITE
