#pragma once

#include <vector>

#include "polyscale/corpus/corpus.hpp"
#include "polyscale/hiermodel/config.hpp"
#include "polyscale/hiermodel/model.hpp"

namespace polyscale::embedalign {
class EmbeddingTable;
}

namespace polyscale::hiermodel {

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;  // mean per-document L_T seen during the epoch
  std::size_t documents = 0;
};

struct TrainingResult {
  HierModel model;
  std::vector<EpochStats> trace;
};

/// One update per document, documents shuffled per epoch from `config.seed`.
/// Documents with no labels of any kind are dropped before anything else.
/// Throws ValidationError if nothing carries supervision.
TrainingResult train(const corpus::Corpus& corpus, const ModelConfig& config,
                     const embedalign::EmbeddingTable* pretrained = nullptr);

/// Mean per-document L_T over the supervised documents of `corpus`.
double corpus_loss(const HierModel& model, const corpus::Corpus& corpus);

/// Encodes every document; fans out over util::worker_count() threads.
std::vector<Prediction> predict(const HierModel& model, const corpus::Corpus& corpus);

}  // namespace polyscale::hiermodel
