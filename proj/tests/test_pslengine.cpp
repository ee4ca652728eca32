#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "polyscale/error.hpp"
#include "polyscale/pslengine/database.hpp"
#include "polyscale/pslengine/ground.hpp"
#include "polyscale/pslengine/program.hpp"
#include "polyscale/pslengine/solver.hpp"

using namespace polyscale;
using namespace polyscale::pslengine;

namespace {

// Lukasiewicz distance written out directly: body conjunction, then implication.
double luk_distance(const std::vector<double>& body, double head) {
  double t = 1.0;
  for (double b : body) t = std::max(0.0, t + b - 1.0);
  return std::max(0.0, t - head);
}

struct RandomNet {
  GroundNetwork net;
  std::size_t free = 0;
};

// Random network over `free` target atoms and a handful of observed ones.
RandomNet random_network(std::mt19937_64& rng, std::size_t free, std::size_t rules, double weight_scale = 1.0,
                         bool allow_linear = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomNet r;
  r.free = free;
  for (std::size_t i = 0; i < free; ++i) r.net.add_atom({"Y", {std::to_string(i)}, true, 0.5});
  for (std::size_t i = 0; i < 4; ++i) r.net.add_atom({"O", {std::to_string(i)}, false, u(rng)});
  const std::size_t atoms = free + 4;
  for (std::size_t k = 0; k < rules; ++k) {
    GroundRule g;
    g.weight = weight_scale * (0.1 + 1.9 * u(rng));
    g.exponent = allow_linear && (rng() % 3 == 0) ? 1 : 2;
    const std::size_t nb = 1 + rng() % 3;
    for (std::size_t b = 0; b < nb; ++b) g.body.push_back({rng() % atoms, rng() % 4 == 0});
    g.head = {rng() % free, rng() % 4 == 0};
    r.net.add_rule(g);
  }
  return r;
}

Program friends_program(const std::string& rule) {
  return parse_program("closed Friend/2\nopen Votes/1\n" + rule);
}

RelationalDatabase clique(const std::vector<std::string>& people) {
  RelationalDatabase db;
  for (const auto& a : people)
    for (const auto& b : people)
      if (a != b) db.observe("Friend", {a, b}, 1.0);
  for (const auto& p : people) db.target("Votes", {p});
  return db;
}

}  // namespace

TEST_SUITE("pslengine") {

TEST_CASE("parse declarations, weights and exponents") {
  const auto p = parse_program(
      "open P/1\nclosed Q/2  # a comment\n"
      "2.5: Q(x, y) & P(x) -> P(y) ^1\n"
      "Q(x, y) & !P(x) -> !P(y)\n");
  REQUIRE(p.rules().size() == 2);
  CHECK(p.rules()[0].weight == 2.5);
  CHECK(p.rules()[0].exponent == 1);
  CHECK(p.rules()[0].body.size() == 2);
  CHECK(p.rules()[1].weight == 1.0);
  CHECK(p.rules()[1].exponent == 2);
  CHECK(p.rules()[1].head.negated);
  CHECK(p.find_predicate("Q")->kind == PredicateKind::Closed);
  CHECK(p.find_predicate("P")->kind == PredicateKind::Open);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_program("Q(x) -> P(z)"), ValidationError);
  CHECK_THROWS_AS(parse_program("-1: Q(x) -> P(x)"), ValidationError);
  CHECK_THROWS_AS(parse_program("open P/1\nP(x, y) -> P(x)"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_program("open P/1\n\nP(x) -> ", "r.psl"), doctest::Contains("r.psl:3:"),
                       ValidationError);
}

TEST_CASE("shipped calibration program parses and round-trips") {
  const auto p = load_program(std::string(POLYSCALE_DATA_DIR) + "/manifesto_calibration.psl");
  CHECK(p.rules().size() == 14);
  CHECK(p.find_predicate("pos")->kind == PredicateKind::Open);
  const auto again = parse_program(print_program(p));
  CHECK(again == p);
  CHECK(print_program(again) == print_program(p));
}

TEST_CASE("grounding a chain keeps only rules with a nonzero body") {
  const auto prog = friends_program("Friend(a, b) & Votes(a) -> Votes(b)");
  RelationalDatabase db;
  db.observe("Friend", {"A", "B"}, 1.0);
  db.observe("Friend", {"B", "C"}, 1.0);
  for (auto p : {"A", "B", "C"}) db.target("Votes", {p});
  const auto net = ground(prog, db);
  CHECK(net.rules().size() == 2);
  CHECK(net.free_count() == 3);
  REQUIRE(net.find_atom("Votes", {"C"}));
  CHECK(net.atoms()[*net.find_atom("Votes", {"A"})].value == 0.5);
}

TEST_CASE("transitivity over a 3-clique matches exhaustive enumeration") {
  const auto prog = friends_program("Friend(a, b) & Friend(b, c) & Votes(a) -> Votes(c)");
  const std::vector<std::string> people = {"A", "B", "C"};
  const auto net = ground(prog, clique(people));

  // every substitution whose hinge is positive at some corner of the free box
  std::size_t expected = 0;
  for (const auto& a : people)
    for (const auto& b : people)
      for (const auto& c : people) {
        const double fab = a != b ? 1.0 : 0.0;
        const double fbc = b != c ? 1.0 : 0.0;
        bool live = false;
        for (int va = 0; va <= 1; ++va)
          for (int vc = 0; vc <= 1; ++vc) {
            const double votes_a = va, votes_c = a == c ? votes_a : vc;
            live |= luk_distance({fab, fbc, votes_a}, votes_c) > 0.0;
          }
        expected += live;
      }
  CHECK(expected == 6);
  CHECK(net.rules().size() == expected);
}

TEST_CASE("missing open atoms are an error") {
  const auto prog = friends_program("Friend(a, b) & Votes(a) -> Votes(b)");
  RelationalDatabase db;
  db.observe("Friend", {"A", "B"}, 1.0);
  db.target("Votes", {"A"});
  CHECK_THROWS_AS(ground(prog, db), ValidationError);
}

TEST_CASE("distance examples") {
  GroundRule r;
  r.body = {{0, false}, {1, false}};
  r.head = {2, false};
  CHECK(distance_to_satisfaction(r, std::vector<double>{1.0, 1.0, 0.0}) == 1.0);
  CHECK(distance_to_satisfaction(r, std::vector<double>{1.0, 1.0, 1.0}) == 0.0);
  CHECK(distance_to_satisfaction(r, std::vector<double>{0.8, 0.7, 0.2}) == doctest::Approx(0.3));
  r.head.negated = true;
  CHECK(distance_to_satisfaction(r, std::vector<double>{1.0, 1.0, 0.25}) == doctest::Approx(0.25));
  CHECK_THROWS_AS(distance_to_satisfaction(r, std::vector<double>{1.0, 1.2, 0.0}), ValidationError);
}

TEST_CASE("distance agrees with the direct formula on 10000 random rules") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 1 + rng() % 4;
    std::vector<double> vals(n + 1);
    for (auto& v : vals) v = u(rng);
    GroundRule r;
    std::vector<double> body;
    for (std::size_t i = 0; i < n; ++i) {
      const bool neg = rng() % 2;
      r.body.push_back({i, neg});
      body.push_back(neg ? 1.0 - vals[i] : vals[i]);
    }
    const bool hneg = rng() % 2;
    r.head = {n, hneg};
    const double d = distance_to_satisfaction(r, vals);
    const double e = luk_distance(body, hneg ? 1.0 - vals[n] : vals[n]);
    CHECK(std::abs(d - e) <= 1e-12);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
  }
}

TEST_CASE("energy example and rule-order invariance") {
  GroundNetwork net;
  const auto a = net.add_atom({"A", {}, false, 1.0});
  const auto y = net.add_atom({"Y", {}, true, 0.5});
  const auto b = net.add_atom({"B", {}, false, 0.0});
  net.add_rule({0, 1.0, {{a, false}}, {y, false}, 2});
  net.add_rule({0, 1.0, {{y, false}}, {b, false}, 2});
  CHECK(energy(net, std::vector<double>{0.7}) == doctest::Approx(0.09 + 0.49));
  CHECK(energy(net, std::vector<double>{0.3}) == doctest::Approx(0.49 + 0.09));

  GroundNetwork two;
  const auto a2 = two.add_atom({"A", {}, false, 1.0});
  const auto y2 = two.add_atom({"Y", {}, true, 0.5});
  two.add_rule({0, 1.0, {{a2, false}}, {y2, false}, 2});
  two.add_rule({0, 1.0, {{a2, false}}, {y2, false}, 2});
  CHECK(energy(two, std::vector<double>{0.7}) == doctest::Approx(0.18));

  std::mt19937_64 rng(22);
  auto base = random_network(rng, 5, 30);
  std::vector<GroundRule> rules = base.net.rules();
  std::shuffle(rules.begin(), rules.end(), rng);
  GroundNetwork shuffled;
  for (const auto& at : base.net.atoms()) shuffled.add_atom(at);
  for (const auto& r : rules) shuffled.add_rule(r);
  const std::vector<double> pt = {0.1, 0.9, 0.4, 0.6, 0.3};
  CHECK(energy(shuffled, pt) == doctest::Approx(energy(base.net, pt)).epsilon(1e-12));
}

TEST_CASE("MAP examples") {
  GroundNetwork sat;
  const auto a = sat.add_atom({"A", {}, false, 1.0});
  const auto y = sat.add_atom({"Y", {}, true, 0.2});
  sat.add_rule({0, 1.0, {{a, false}}, {y, false}, 2});
  const auto r0 = map_inference(sat);
  CHECK(r0.energy <= 1e-10);
  CHECK(r0.y[0] == doctest::Approx(1.0).epsilon(1e-4));

  GroundNetwork split;
  const auto a2 = split.add_atom({"A", {}, false, 1.0});
  const auto y2 = split.add_atom({"Y", {}, true, 0.9});
  const auto b2 = split.add_atom({"B", {}, false, 0.0});
  split.add_rule({0, 1.0, {{a2, false}}, {y2, false}, 2});
  split.add_rule({0, 1.0, {{y2, false}}, {b2, false}, 2});
  const auto r1 = map_inference(split);
  CHECK(r1.converged);
  CHECK(std::abs(r1.y[0] - 0.5) <= 1e-4);
  CHECK(r1.energy == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("MAP matches a grid search on two-variable networks") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 25; ++t) {
    auto rn = random_network(rng, 2, 8);
    const auto res = map_inference(rn.net);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 200; ++i)
      for (int j = 0; j <= 200; ++j) best = std::min(best, energy(rn.net, std::vector<double>{i / 200.0, j / 200.0}));
    CHECK(res.energy <= best + 1e-6);
    for (double v : res.y) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("energy is convex along random segments") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    auto rn = random_network(rng, 6, 20);
    std::vector<double> y1(6), y2(6), mid(6);
    for (auto& v : y1) v = u(rng);
    for (auto& v : y2) v = u(rng);
    const double lam = u(rng);
    for (std::size_t i = 0; i < 6; ++i) mid[i] = lam * y1[i] + (1 - lam) * y2[i];
    CHECK(energy(rn.net, mid) <= lam * energy(rn.net, y1) + (1 - lam) * energy(rn.net, y2) + 1e-12);
  }
}

TEST_CASE("scaling all weights scales the energy and keeps the minimiser") {
  for (std::uint64_t seed : {25u, 26u, 27u}) {
    std::mt19937_64 r1(seed), r2(seed);
    auto a = random_network(r1, 4, 15, 1.0, false);
    auto b = random_network(r2, 4, 15, 3.0, false);
    const auto ma = map_inference(a.net);
    const auto mb = map_inference(b.net);
    CHECK(mb.energy == doctest::Approx(3.0 * ma.energy).epsilon(1e-5));
    // unique minimiser is not guaranteed, so compare at each other's optimum
    CHECK(energy(b.net, ma.y) <= mb.energy + 1e-6);
  }
}

TEST_CASE("solutions stay inside the box, with and without linear hinges") {
  std::mt19937_64 rng(28);
  for (int t = 0; t < 20; ++t) {
    auto rn = random_network(rng, 8, 40, 1.0, t % 2 == 0);
    const auto res = map_inference(rn.net);
    REQUIRE(res.y.size() == 8);
    for (double v : res.y) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(res.energy <= energy(rn.net, rn.net.initial_assignment()) + 1e-12);
  }
}

TEST_CASE("database validation and TSV round trip") {
  RelationalDatabase db;
  CHECK_THROWS_AS(db.observe("P", {"a"}, 1.5), ValidationError);
  db.observe("P", {"a"}, 0.25);
  db.observe("Q", {"a", "b"}, 1.0);
  db.target("R", {"a"}, 0.75);
  db.target("R", {"b"});
  CHECK_THROWS_AS(db.target("P", {"a"}), ValidationError);
  CHECK_THROWS_AS(db.target("R", {"c"}, 2.0), ValidationError);

  std::stringstream buf;
  db.write(buf);
  const auto back = RelationalDatabase::parse(buf);
  CHECK(back.observation_count() == 2);
  CHECK(back.target_count() == 2);
  CHECK(back.observed("P", {"a"}) == 0.25);
  CHECK(back.is_target("R", {"b"}));
  CHECK(back.targets("R")[0].initial == 0.75);
  CHECK_FALSE(back.targets("R")[1].initial.has_value());
  std::stringstream again;
  back.write(again);
  CHECK(again.str() == buf.str());

  std::istringstream bad("observed\tP\tnan\ta\n");
  CHECK_THROWS_AS(RelationalDatabase::parse(bad), ValidationError);
}

}  // TEST_SUITE
