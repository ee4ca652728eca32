#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyscale/corpus/corpus.hpp"
#include "polyscale/diffcore/lstm.hpp"
#include "polyscale/diffcore/params.hpp"
#include "polyscale/diffcore/tape.hpp"
#include "polyscale/hiermodel/config.hpp"
#include "polyscale/hiermodel/vocabulary.hpp"

namespace polyscale::embedalign {
class EmbeddingTable;
}

namespace polyscale::hiermodel {

struct SentencePrediction {
  Eigen::VectorXd y;  // distribution over the scheme's codes
  Eigen::VectorXd p;  // LEFT / RIGHT / NEUTRAL distribution
  Eigen::VectorXd h;  // sentence vector, 2 * sentence_hidden
};

struct Prediction {
  std::string manifesto_id;
  std::vector<SentencePrediction> sentences;
  Eigen::VectorXd doc_vector;  // mean of [y_i; h_i]
  double r_hat = 0.0;          // in (-1, 1)

  std::size_t predicted_class(std::size_t sentence) const;
  corpus::Polarity predicted_polarity(std::size_t sentence) const;
};

/// Nodes of one document's forward pass on a tape.
struct DocumentGraph {
  std::vector<diffcore::Var> class_logits;
  std::vector<diffcore::Var> y;
  std::vector<diffcore::Var> polarity_logits;
  std::vector<diffcore::Var> p;
  std::vector<diffcore::Var> h;
  diffcore::Var doc_vector;
  diffcore::Var r_hat;
};

/// Supervision available for one document.
struct DocumentTargets {
  std::vector<std::size_t> codes;  // empty unless every sentence is coded
  std::vector<corpus::Polarity> polarities;
  std::optional<double> rile;

  bool has_sentence_labels() const { return !codes.empty(); }
  bool empty() const { return codes.empty() && !rile; }
};

/// Throws ValidationError when a gold code is not in the scheme.
DocumentTargets targets_for(const corpus::Manifesto& manifesto, const corpus::LabelScheme& scheme);

struct LossNodes {
  std::optional<diffcore::Var> sentence;    // L_S
  std::optional<diffcore::Var> polarity;    // L_SP
  std::optional<diffcore::Var> document;    // L_D
  std::optional<diffcore::Var> structured;  // L_struc
  diffcore::Var total;                      // L_T restricted to the active terms
};

/// Word bi-LSTM -> sentence bi-LSTM -> code head, polarity head, mean
/// pooling over [y_i; h_i] -> tanh document score.
class HierModel {
 public:
  HierModel(ModelConfig config, Vocabulary vocabulary, const corpus::LabelScheme& scheme,
            const embedalign::EmbeddingTable* pretrained = nullptr);

  /// Rebuilds a model from stored parameters (checkpoint loading).
  HierModel(ModelConfig config, Vocabulary vocabulary, std::vector<std::string> codes,
            diffcore::ParameterStore params);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<std::string>& codes() const { return codes_; }
  std::size_t num_classes() const { return codes_.size(); }
  diffcore::ParameterStore& params() { return params_; }
  const diffcore::ParameterStore& params() const { return params_; }

  /// Throws ValidationError on a document without sentences or tokens.
  DocumentGraph build(diffcore::Tape& tape, const corpus::Manifesto& manifesto);

  /// Loss for one document; the terms present depend on `targets`.
  LossNodes build_loss(diffcore::Tape& tape, const DocumentGraph& graph,
                       const DocumentTargets& targets) const;

  Prediction encode(const corpus::Manifesto& manifesto) const;

 private:
  void bind_layout();

  ModelConfig config_;
  Vocabulary vocab_;
  std::vector<std::string> codes_;
  diffcore::ParameterStore params_;

  std::size_t embedding_ = 0;
  diffcore::LstmParams word_fwd_, word_bwd_, sent_fwd_, sent_bwd_;
  std::size_t class_w_ = 0, class_b_ = 0;
  std::size_t polarity_w_ = 0, polarity_b_ = 0;
  std::size_t doc_w_ = 0, doc_b_ = 0;
};

/// Throws ValidationError on an empty document.
Prediction encode_document(const corpus::Manifesto& manifesto, const HierModel& model);

/// Mean of the per-sentence [y_i; h_i] concatenations.
Eigen::VectorXd pool_document(const std::vector<SentencePrediction>& sentences);

}  // namespace polyscale::hiermodel
