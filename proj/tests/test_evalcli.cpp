#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "polyscale/error.hpp"
#include "polyscale/evalcli/ches.hpp"
#include "polyscale/evalcli/config.hpp"
#include "polyscale/evalcli/experiment.hpp"
#include "polyscale/evalcli/metrics.hpp"
#include "polyscale/evalcli/split.hpp"
#include "polyscale/evalcli/synthetic.hpp"

using namespace polyscale;
using namespace polyscale::evalcli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("polyscale_unit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Ranks by counting, then the textbook Pearson formula on them.
double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

SyntheticData small_synthetic(std::size_t docs = 60) {
  SyntheticConfig sc;
  sc.documents = docs;
  sc.languages = {"en", "de"};
  sc.parties_per_country = 6;
  sc.min_sentences = 4;
  sc.max_sentences = 6;
  sc.embedding_dim = 6;
  return generate_synthetic(corpus::LabelScheme::cmp_default(), sc);
}

}  // namespace

TEST_SUITE("evalcli") {

TEST_CASE("micro F examples") {
  const std::vector<std::string> pred = {"a", "b", "c", "a"};
  const std::vector<std::string> gold = {"a", "b", "a", "a"};
  CHECK(micro_f(pred, gold) == doctest::Approx(0.75));
  CHECK(micro_f(pred, gold, {"c"}) == doctest::Approx(2.0 * 0.75 / 1.75));
  CHECK(micro_f(gold, gold) == 1.0);
  CHECK_THROWS_AS(micro_f(std::vector<std::string>{}, std::vector<std::string>{}), ValidationError);
  CHECK_THROWS_AS(micro_f(pred, std::vector<std::string>{"a"}), ValidationError);
}

TEST_CASE("micro F without exclusions equals accuracy") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<std::string> p(n), g(n);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = std::to_string(rng() % 5);
      g[i] = std::to_string(rng() % 5);
      hit += p[i] == g[i];
    }
    CHECK(micro_f(p, g) == doctest::Approx(static_cast<double>(hit) / n).epsilon(1e-12));
  }
}

TEST_CASE("correlation examples") {
  const std::vector<double> x = {1, 2, 3};
  CHECK(pearson(x, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson(x, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman(x, std::vector<double>{1, 10, 100}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), ValidationError);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{5, 5, 5}), ValidationError);
  CHECK(average_ranks(std::vector<double>{10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("spearman agrees with brute-force ranks and ignores monotone maps") {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + rng() % 30;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % 8);  // plenty of ties
      y[i] = static_cast<double>(rng() % 8);
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) continue;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) continue;
    const double s = spearman(x, y);
    CHECK(s == doctest::Approx(brute_spearman(x, y)).epsilon(1e-12));
    std::vector<double> ex(n);
    for (std::size_t i = 0; i < n; ++i) ex[i] = std::exp(x[i]) + 3.0;
    CHECK(spearman(ex, y) == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("correlate skips missing gold") {
  const std::vector<double> s = {0.1, 0.2, 0.3, 0.4};
  const std::vector<std::optional<double>> g = {1.0, std::nullopt, 3.0, 4.0};
  const auto c = correlate(s, g);
  REQUIRE(c);
  CHECK(c->n == 3);
  CHECK(c->rho == doctest::Approx(1.0));
  CHECK_FALSE(correlate(s, {1.0, std::nullopt, std::nullopt, std::nullopt}));
}

TEST_CASE("stratified split sizes per country") {
  const auto data = small_synthetic();
  SplitSpec spec;
  const auto s = make_split(data.corpus, spec, 0);
  std::map<std::string, std::size_t> total, test;
  for (std::size_t i = 0; i < data.corpus.size(); ++i) ++total[data.corpus[i].country];
  for (auto i : s.test) ++test[data.corpus[i].country];
  for (const auto& [c, n] : total) {
    const double want = n * spec.test_fraction;
    CHECK(std::abs(static_cast<double>(test[c]) - want) <= 1.0);
  }
  CHECK_FALSE(s.dev.empty());
}

TEST_CASE("splits are disjoint, exhaustive and deterministic") {
  const auto data = small_synthetic();
  for (auto kind : {SplitKind::RandomStratified, SplitKind::Temporal}) {
    SplitSpec spec;
    spec.kind = kind;
    for (std::size_t rep = 0; rep < 3; ++rep) {
      const auto s = make_split(data.corpus, spec, rep);
      std::vector<std::size_t> all;
      all.insert(all.end(), s.train.begin(), s.train.end());
      all.insert(all.end(), s.dev.begin(), s.dev.end());
      all.insert(all.end(), s.test.begin(), s.test.end());
      std::sort(all.begin(), all.end());
      CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
      CHECK(all.size() == data.corpus.size());
      const auto again = make_split(data.corpus, spec, rep);
      CHECK(again.train == s.train);
      CHECK(again.dev == s.dev);
      CHECK(again.test == s.test);
      if (kind == SplitKind::Temporal) {
        for (auto i : s.train) CHECK(data.corpus[i].election_date < spec.cutoff);
        for (auto i : s.dev) CHECK(data.corpus[i].election_date < spec.cutoff);
        for (auto i : s.test) CHECK_FALSE(data.corpus[i].election_date < spec.cutoff);
      }
    }
  }
  SplitSpec late;
  late.kind = SplitKind::Temporal;
  late.cutoff = util::parse_iso_date("2100-01-01");
  CHECK_THROWS_AS(make_split(data.corpus, late), ValidationError);
}

TEST_CASE("CHES lookup uses the nearest survey year") {
  ChesTable t;
  t.add("P", 2000, 3.0);
  t.add("P", 2004, 7.0);
  t.add("P", 2010, 9.0);
  CHECK(t.lookup("P", util::parse_iso_date("2002-05-01")) == 3.0);  // tie goes earlier
  CHECK(t.lookup("P", util::parse_iso_date("2003-05-01")) == 7.0);
  CHECK(t.lookup("P", util::parse_iso_date("2015-05-01")) == 9.0);
  CHECK_FALSE(t.lookup("Q", util::parse_iso_date("2003-05-01")));
  std::istringstream bad("P\tyear\t1.0\n");
  CHECK_THROWS_AS(ChesTable::parse(bad), ValidationError);
}

TEST_CASE("config readers override and reject unknown keys") {
  const auto m = read_model_config(YAML::Load("{alpha: 0.5, epochs: 3}"));
  CHECK(m.alpha == 0.5);
  CHECK(m.epochs == 3);
  CHECK(m.gamma == 0.7);
  CHECK_THROWS_AS(read_model_config(YAML::Load("{alpah: 0.5}")), ValidationError);
  CHECK_THROWS_AS(read_model_config(YAML::Load("{epochs: many}")), ValidationError);
  CHECK_THROWS_AS(read_split_spec(YAML::Load("{kind: sideways}")), ValidationError);

  const auto root = YAML::Load(
      "seed: 9\n"
      "data: {corpus: c.jsonl, party_graph: /abs/g.tsv}\n"
      "model: {epochs: 2}\n"
      "evaluate: {excluded_codes: ['000']}\n");
  const auto cfg = read_experiment_config(root, "/base");
  CHECK(cfg.seed == 9);
  CHECK(cfg.data.corpus == fs::path("/base/c.jsonl"));
  CHECK(cfg.data.party_graph == fs::path("/abs/g.tsv"));
  CHECK(cfg.excluded_codes.count("000"));
  CHECK(canonical_config(cfg) == canonical_config(read_experiment_config(root, "/base")));
  CHECK_THROWS_AS(read_experiment_config(YAML::Load("{seed: 1, data: {corpus: x}, extra: 1}"), "/"),
                  ValidationError);

  const auto dir = scratch("cfg");
  {
    std::ofstream f(dir / "broken.yaml");
    f << "model: {alpha: [\n";
  }
  CHECK_THROWS_WITH_AS(load_config_file(dir / "broken.yaml"), doctest::Contains("broken.yaml:"), ValidationError);
}

TEST_CASE("end-to-end experiment on synthetic data writes the tables reproducibly") {
  const auto dir = scratch("e2e");
  const auto data = small_synthetic(48);
  write_synthetic(data, dir / "syn");

  ExperimentConfig cfg;
  cfg.data.corpus = dir / "syn/corpus.jsonl";
  cfg.data.party_graph = dir / "syn/party_graph.tsv";
  cfg.data.ches = dir / "syn/ches.tsv";
  cfg.model.word_hidden = 4;
  cfg.model.sentence_hidden = 4;
  cfg.model.embedding_dim = 6;
  cfg.model.epochs = 1;
  cfg.random.repeats = 2;
  cfg.folds = 2;
  cfg.reseed(4);

  const auto a = run_experiment(cfg, dir / "a");
  const auto b = run_experiment(cfg, dir / "b");
  CHECK(a.repeats.size() == 2);
  REQUIRE(a.temporal);
  CHECK(a.temporal->ablation.size() == 5);
  for (const auto* f : {"sentence_f.csv", "document_scores.csv", "random_repeats.csv",
                        "temporal_sentence_f.csv", "calibration_ablation.csv", "temporal_positions.csv"}) {
    REQUIRE_MESSAGE(fs::exists(dir / "a" / f), f);
    CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
  }
  CHECK(slurp(dir / "a/manifest.json") == slurp(dir / "b/manifest.json"));

  std::istringstream t5(slurp(dir / "a/calibration_ablation.csv"));
  std::vector<std::string> lines;
  for (std::string l; std::getline(t5, l);) lines.push_back(l);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0].rfind("approach,", 0) == 0);
  CHECK(lines[1].rfind("Joint_struc,", 0) == 0);

  const auto text = summarize_run(dir / "a");
  CHECK(text.find("Joint_struc") != std::string::npos);
  {
    std::ofstream f(dir / "a/document_scores.csv", std::ios::app);
    f << "tampered\n";
  }
  CHECK_THROWS_AS(summarize_run(dir / "a"), ValidationError);
}

}  // TEST_SUITE
