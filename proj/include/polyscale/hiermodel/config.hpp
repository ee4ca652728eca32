#pragma once

#include <cstddef>
#include <cstdint>

namespace polyscale::hiermodel {

struct ModelConfig {
  std::size_t word_hidden = 32;
  std::size_t sentence_hidden = 32;
  std::size_t embedding_dim = 50;  // ignored when pretrained embeddings are supplied
  std::size_t vocab_cap = 20000;   // per language

  // L_T = alpha L_S + (1 - alpha) L_D + beta L_SP + gamma L_struc
  double alpha = 0.3;
  double beta = 0.1;
  double gamma = 0.7;

  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  bool trainable_embeddings = true;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

/// Named presets for the model family: sentence-only (alpha = 1), document-only
/// (alpha = 0), joint (beta = gamma = 0) and joint-structured (all terms).
ModelConfig joint_sent(ModelConfig base);
ModelConfig joint_doc(ModelConfig base);
ModelConfig joint(ModelConfig base);
ModelConfig joint_struc(ModelConfig base);

}  // namespace polyscale::hiermodel
