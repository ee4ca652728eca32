#include "polyscale/diffcore/lstm.hpp"

#include <algorithm>

#include "polyscale/error.hpp"

namespace polyscale::diffcore {

namespace {

Tensor uniform(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Tensor t(rows, cols);
  // Fill in a fixed (column-major) order so results only depend on the seed.
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) t(r, c) = dist(rng);
  }
  return t;
}

}  // namespace

LstmParams add_lstm(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                    std::size_t hidden_dim, std::mt19937_64& rng, double scale) {
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  const auto width = static_cast<Eigen::Index>(input_dim + hidden_dim);
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w_input = store.add(prefix + ".W_i", uniform(h, width, scale, rng));
  p.b_input = store.add(prefix + ".b_i", uniform(h, 1, scale, rng));
  p.w_forget = store.add(prefix + ".W_f", uniform(h, width, scale, rng));
  p.b_forget = store.add(prefix + ".b_f", Tensor::Ones(h, 1));
  p.w_output = store.add(prefix + ".W_o", uniform(h, width, scale, rng));
  p.b_output = store.add(prefix + ".b_o", uniform(h, 1, scale, rng));
  p.w_candidate = store.add(prefix + ".W_g", uniform(h, width, scale, rng));
  p.b_candidate = store.add(prefix + ".b_g", uniform(h, 1, scale, rng));
  return p;
}

LstmParams find_lstm(const ParameterStore& store, const std::string& prefix) {
  auto idx = [&](const char* suffix) {
    auto i = store.find(prefix + suffix);
    if (!i) throw ValidationError("missing LSTM parameter " + prefix + suffix);
    return *i;
  };
  LstmParams p;
  p.w_input = idx(".W_i");
  p.b_input = idx(".b_i");
  p.w_forget = idx(".W_f");
  p.b_forget = idx(".b_f");
  p.w_output = idx(".W_o");
  p.b_output = idx(".b_o");
  p.w_candidate = idx(".W_g");
  p.b_candidate = idx(".b_g");
  p.hidden_dim = static_cast<std::size_t>(store[p.w_input].value.rows());
  p.input_dim = static_cast<std::size_t>(store[p.w_input].value.cols()) - p.hidden_dim;
  return p;
}

std::vector<Var> lstm_run(Tape& tape, ParameterStore& store, const LstmParams& params,
                          std::span<const Var> sequence) {
  const auto h = static_cast<Eigen::Index>(params.hidden_dim);
  const Var wi = tape.param(store, params.w_input), bi = tape.param(store, params.b_input);
  const Var wf = tape.param(store, params.w_forget), bf = tape.param(store, params.b_forget);
  const Var wo = tape.param(store, params.w_output), bo = tape.param(store, params.b_output);
  const Var wg = tape.param(store, params.w_candidate), bg = tape.param(store, params.b_candidate);

  Var hidden = tape.constant(Tensor::Zero(h, 1));
  Var cell = hidden;
  std::vector<Var> states;
  states.reserve(sequence.size());
  for (const Var x : sequence) {
    if (tape.value(x).rows() != static_cast<Eigen::Index>(params.input_dim)) {
      throw ValidationError("LSTM input has wrong width");
    }
    const Var xh[] = {x, hidden};
    const Var in = tape.concat(xh);
    const Var i = tape.sigmoid(tape.add(tape.matmul(wi, in), bi));
    const Var f = tape.sigmoid(tape.add(tape.matmul(wf, in), bf));
    const Var o = tape.sigmoid(tape.add(tape.matmul(wo, in), bo));
    const Var g = tape.tanh(tape.add(tape.matmul(wg, in), bg));
    cell = tape.add(tape.mul(f, cell), tape.mul(i, g));
    hidden = tape.mul(o, tape.tanh(cell));
    states.push_back(hidden);
  }
  return states;
}

BiLstmOutput bilstm_encode(Tape& tape, ParameterStore& store, std::span<const Var> sequence,
                           const LstmParams& forward, const LstmParams& backward) {
  if (sequence.empty()) throw ValidationError("cannot encode an empty sequence");
  const auto fwd = lstm_run(tape, store, forward, sequence);
  std::vector<Var> reversed(sequence.rbegin(), sequence.rend());
  auto bwd = lstm_run(tape, store, backward, reversed);
  std::reverse(bwd.begin(), bwd.end());  // bwd[t] now belongs to position t

  BiLstmOutput out;
  out.steps.reserve(sequence.size());
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    const Var pair[] = {fwd[t], bwd[t]};
    out.steps.push_back(tape.concat(pair));
  }
  const Var last[] = {fwd.back(), bwd.front()};
  out.final = tape.concat(last);
  return out;
}

}  // namespace polyscale::diffcore
