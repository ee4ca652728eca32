#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "polyscale/diffcore/params.hpp"
#include "polyscale/diffcore/tape.hpp"

namespace polyscale::diffcore {

/// One LSTM direction. Each gate has its own weight matrix of shape
/// hidden x (input + hidden), applied to [x_t; h_{t-1}], and a bias vector.
/// Fields hold indices into the owning ParameterStore.
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t w_input = 0, b_input = 0;
  std::size_t w_forget = 0, b_forget = 0;
  std::size_t w_output = 0, b_output = 0;
  std::size_t w_candidate = 0, b_candidate = 0;
};

/// Registers "<prefix>.{W,b}_{i,f,o,g}" with weights ~ U(-scale, scale) and
/// the forget bias set to 1.0.
LstmParams add_lstm(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                    std::size_t hidden_dim, std::mt19937_64& rng, double scale = 0.08);

/// Resolves an LstmParams layout by name (used after loading a checkpoint).
LstmParams find_lstm(const ParameterStore& store, const std::string& prefix);

/// Runs one direction over `sequence` and returns the hidden state after
/// every step, in processing order.
std::vector<Var> lstm_run(Tape& tape, ParameterStore& store, const LstmParams& params,
                          std::span<const Var> sequence);

struct BiLstmOutput {
  /// Per position t: [forward h_t; backward h_t], width 2 * hidden.
  std::vector<Var> steps;
  /// [last forward state; last backward state] (the backward LSTM ends at t = 1).
  Var final;
};

/// Throws ValidationError on an empty sequence.
BiLstmOutput bilstm_encode(Tape& tape, ParameterStore& store, std::span<const Var> sequence,
                           const LstmParams& forward, const LstmParams& backward);

}  // namespace polyscale::diffcore
