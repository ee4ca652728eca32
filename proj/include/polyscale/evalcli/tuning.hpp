#pragma once

#include <optional>
#include <vector>

#include "polyscale/corpus/corpus.hpp"
#include "polyscale/hiermodel/config.hpp"

namespace polyscale::embedalign {
class EmbeddingTable;
}

namespace polyscale::evalcli {

struct TuneGrid {
  std::vector<double> alphas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> gammas = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  std::vector<double> betas = {0.0, 0.05, 0.1, 0.2, 0.5};
  double beta_during_gamma = 0.1;
};

struct TunePoint {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  std::optional<double> dev_f;
  std::optional<double> dev_r;
  double score = 0.0;  // dev_f + dev_r, missing parts count as 0
};

struct TuneResult {
  hiermodel::ModelConfig best;
  std::vector<TunePoint> alpha_sweep;  // beta = gamma = 0
  std::vector<TunePoint> gamma_sweep;  // best alpha, beta fixed
  std::vector<TunePoint> beta_sweep;   // best alpha and gamma
};

/// Coordinate grid search: alpha first, then gamma, then beta, each chosen
/// by dev score with the others held. Grid points of a sweep train in
/// parallel. Throws ValidationError when dev has neither annotated
/// sentences nor RILE scores.
TuneResult tune(const corpus::Corpus& train, const corpus::Corpus& dev,
                const hiermodel::ModelConfig& base, const TuneGrid& grid = {},
                const embedalign::EmbeddingTable* pretrained = nullptr);

}  // namespace polyscale::evalcli
