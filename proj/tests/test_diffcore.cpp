#include <doctest.h>

#include <cmath>
#include <random>

#include "polyscale/diffcore/adam.hpp"
#include "polyscale/diffcore/gradcheck.hpp"
#include "polyscale/diffcore/lstm.hpp"
#include "polyscale/diffcore/params.hpp"
#include "polyscale/diffcore/tape.hpp"
#include "polyscale/error.hpp"

using namespace polyscale;
using namespace polyscale::diffcore;

namespace {

std::vector<Eigen::VectorXd> random_sequence(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  for (std::size_t t = 0; t < n; ++t) {
    Eigen::VectorXd v(d);
    for (std::size_t j = 0; j < d; ++j) v(j) = u(rng);
    out.push_back(v);
  }
  return out;
}

Eigen::MatrixXd seeded(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

std::vector<Var> constants(Tape& tape, const std::vector<Eigen::VectorXd>& xs) {
  std::vector<Var> out;
  for (const auto& x : xs) out.push_back(tape.constant(x));
  return out;
}

}  // namespace

TEST_SUITE("diffcore") {

TEST_CASE("lstm initialisation") {
  ParameterStore store;
  std::mt19937_64 rng(1);
  const auto p = add_lstm(store, "l", 3, 4, rng);
  CHECK(store[p.b_forget].value.isApproxToConstant(1.0));
  CHECK(store[p.w_input].value.rows() == 4);
  CHECK(store[p.w_input].value.cols() == 7);
  for (const auto& prm : store) {
    if (prm.name == "l.b_f") continue;
    CHECK(prm.value.cwiseAbs().maxCoeff() <= 0.08);
  }
  const auto again = find_lstm(store, "l");
  CHECK(again.w_candidate == p.w_candidate);
  CHECK(again.hidden_dim == 4);
}

TEST_CASE("bilstm on a length-1 sequence") {
  ParameterStore store;
  std::mt19937_64 rng(2);
  const auto f = add_lstm(store, "f", 3, 4, rng);
  const auto b = add_lstm(store, "b", 3, 4, rng);
  Tape tape;
  const auto xs = constants(tape, random_sequence(1, 3, 3));
  const auto out = bilstm_encode(tape, store, xs, f, b);
  REQUIRE(out.steps.size() == 1);
  CHECK(tape.value(out.steps[0]) == tape.value(out.final));
  CHECK(tape.value(out.final).rows() == 8);
}

TEST_CASE("reversing the input swaps forward and backward roles") {
  ParameterStore store;
  std::mt19937_64 rng(4);
  const auto f = add_lstm(store, "f", 3, 5, rng);
  const auto b = add_lstm(store, "b", 3, 5, rng);
  auto seq = random_sequence(5, 3, 5);
  Tape t1;
  const auto x = bilstm_encode(t1, store, constants(t1, seq), f, b);
  std::reverse(seq.begin(), seq.end());
  Tape t2;
  const auto r = bilstm_encode(t2, store, constants(t2, seq), b, f);
  const auto& fx = t1.value(x.final);
  const auto& fr = t2.value(r.final);
  CHECK((fx.topRows(5) - fr.bottomRows(5)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((fx.bottomRows(5) - fr.topRows(5)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero input and zero parameters give zero states") {
  ParameterStore store;
  std::mt19937_64 rng(6);
  const auto f = add_lstm(store, "f", 2, 3, rng);
  const auto b = add_lstm(store, "b", 2, 3, rng);
  for (auto& p : store) p.value.setZero();
  Tape tape;
  const auto out = bilstm_encode(tape, store, constants(tape, std::vector<Eigen::VectorXd>(4, Eigen::VectorXd::Zero(2))), f, b);
  for (auto s : out.steps) CHECK(tape.value(s).isZero(0.0));
}

TEST_CASE("bilstm rejects an empty sequence") {
  ParameterStore store;
  std::mt19937_64 rng(7);
  const auto f = add_lstm(store, "f", 2, 3, rng);
  Tape tape;
  CHECK_THROWS_AS(bilstm_encode(tape, store, {}, f, f), ValidationError);
}

TEST_CASE("softmax_xent examples") {
  const auto u = softmax_xent(Eigen::VectorXd::Zero(57), 3);
  CHECK(u.probabilities.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u.probabilities(0) == doctest::Approx(1.0 / 57.0));
  CHECK(u.loss == doctest::Approx(std::log(57.0)));

  Eigen::VectorXd z(2);
  z << 10.0, -10.0;
  const auto s = softmax_xent(z, 0);
  CHECK(s.loss == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-6));
  CHECK(s.loss == doctest::Approx(2.06e-9).epsilon(0.01));

  Eigen::VectorXd a(4);
  a << 0.3, -1.2, 2.0, 0.0;
  const auto p1 = softmax_xent(a, 1).probabilities;
  const auto p2 = softmax_xent((a.array() + 7.5).matrix(), 1).probabilities;
  CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(softmax_xent(a, 4), ValidationError);
  a(0) = std::nan("");
  CHECK_THROWS_AS(softmax_xent(a, 0), ValidationError);
}

TEST_CASE("softmax and tanh ranges") {
  Tape tape;
  Eigen::VectorXd v(5);
  v << -30, -1, 0, 1, 30;
  const auto x = tape.constant(v);
  const auto& s = tape.value(tape.softmax(x));
  CHECK(s.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((s.array() >= 0.0).all());
  CHECK((s.array() < 1.0).all());
  const auto& t = tape.value(tape.tanh(tape.scale(x, 0.1)));
  CHECK((t.array().abs() < 1.0).all());
}

TEST_CASE("sum of parameters has unit gradients") {
  ParameterStore store;
  const auto w = store.add("w", seeded(3, 2, 101));
  Tape tape;
  tape.backward(tape.sum(tape.param(store, w)));
  CHECK(store[w].grad.isApproxToConstant(1.0));
}

TEST_CASE("quadratic has gradient 2w") {
  ParameterStore store;
  const auto w = store.add("w", seeded(4, 1, 102));
  const auto u = store.add("unused", seeded(2, 1, 103));
  store.zero_grad();
  Tape tape;
  tape.backward(tape.sum(tape.square(tape.param(store, w))));
  CHECK((store[w].grad - 2.0 * store[w].value).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(store[u].grad.isZero(0.0));
}

TEST_CASE("backward needs a scalar root") {
  ParameterStore store;
  const auto w = store.add("w", seeded(2, 1, 104));
  Tape tape;
  CHECK_THROWS_AS(tape.backward(tape.param(store, w)), ValidationError);
}

TEST_CASE("duplicate parameter names are rejected") {
  ParameterStore store;
  store.add("w", Eigen::MatrixXd::Zero(1, 1));
  CHECK_THROWS_AS(store.add("w", Eigen::MatrixXd::Zero(1, 1)), ValidationError);
}

TEST_CASE("every op passes the finite-difference check") {
  ParameterStore store;
  std::mt19937_64 rng(8);
  const auto f = add_lstm(store, "f", 3, 4, rng);
  const auto b = add_lstm(store, "b", 3, 4, rng);
  const auto emb = store.add("emb", seeded(6, 3, 105) * 0.5);
  const auto W = store.add("W", seeded(5, 8, 106) * 0.3);
  const auto c = store.add("c", seeded(5, 1, 107) * 0.3);
  const auto v = store.add("v", seeded(5, 1, 108) * 0.3);

  auto loss = [&](Tape& t) {
    std::vector<Var> xs;
    for (Eigen::Index r : {0, 3, 5, 1}) xs.push_back(t.row(store, emb, r));
    const auto enc = bilstm_encode(t, store, xs, f, b);
    const auto logits = t.add(t.matmul(t.param(store, W), enc.final), t.param(store, c));
    const auto ce = t.cross_entropy(logits, 2);
    const auto sm = t.softmax(logits);
    const auto lg = t.sum(t.log(t.pick(sm, 4)));
    const auto pooled = t.mean(enc.steps);
    const std::array<Var, 2> both{pooled, t.param(store, v)};
    const auto cat = t.concat(both);
    const auto sq = t.sum(t.square(t.tanh(t.mul(cat, cat))));
    const auto sig = t.sum(t.sigmoid(t.sub(t.param(store, v), t.param(store, c))));
    return t.add(t.add(ce, t.scale(lg, -0.5)), t.add(sq, sig));
  };
  const auto report = check_gradients(loss, store, 1e-5);
  CAPTURE(report.worst_parameter);
  CAPTURE(report.worst_row);
  CAPTURE(report.worst_col);
  CAPTURE(report.worst_analytic);
  CAPTURE(report.worst_numeric);
  CHECK(report.coordinates == store.scalar_count());
  CHECK(report.max_relative_error <= 1e-4);
}

TEST_CASE("a wrong gradient is still flagged after refinement") {
  ParameterStore store;
  store.add("w", seeded(3, 2, 99));
  int calls = 0;
  // the first build feeds backward(); later ones are 0.1% steeper
  auto loss = [&](Tape& t) {
    const double k = calls++ == 0 ? 1.0 : 1.001;
    return t.scale(t.sum(t.square(t.param(store, 0))), k);
  };
  const auto report = check_gradients(loss, store, 1e-5);
  CHECK(report.refined == report.coordinates);
  CHECK(report.max_relative_error == doctest::Approx(0.0005).epsilon(0.01));
}

TEST_CASE("adam decreases a quadratic and respects frozen parameters") {
  ParameterStore store;
  const auto w = store.add("w", Eigen::MatrixXd::Constant(3, 1, 2.0));
  const auto fixed = store.add("fixed", Eigen::MatrixXd::Constant(1, 1, 1.0), false);
  Adam adam(store, {0.1, 0.9, 0.999, 1e-8, 5.0});
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 50; ++i) {
    store.zero_grad();
    Tape tape;
    const auto l = tape.add(tape.sum(tape.square(tape.param(store, w))), tape.sum(tape.param(store, fixed)));
    if (i == 0) first = tape.scalar(l);
    last = tape.scalar(l);
    tape.backward(l);
    adam.step(store);
  }
  CHECK(last < first);
  CHECK(store[fixed].value(0, 0) == 1.0);
}

TEST_CASE("forward and backward are deterministic") {
  auto run = [] {
    ParameterStore store;
    std::mt19937_64 rng(9);
    const auto f = add_lstm(store, "f", 2, 3, rng);
    const auto b = add_lstm(store, "b", 2, 3, rng);
    store.zero_grad();
    Tape tape;
    const auto out = bilstm_encode(tape, store, constants(tape, random_sequence(4, 2, 10)), f, b);
    tape.backward(tape.sum(out.final));
    std::vector<Eigen::MatrixXd> g;
    for (const auto& p : store) g.push_back(p.grad);
    return g;
  };
  CHECK(run() == run());
}

}  // TEST_SUITE
