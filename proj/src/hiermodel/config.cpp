#include "polyscale/hiermodel/config.hpp"

#include <cmath>
#include <string>

#include "polyscale/error.hpp"

namespace polyscale::hiermodel {

void ModelConfig::validate() const {
  if (word_hidden == 0 || sentence_hidden == 0) throw ValidationError("hidden sizes must be positive");
  if (embedding_dim == 0) throw ValidationError("embedding_dim must be positive");
  if (vocab_cap == 0) throw ValidationError("vocab_cap must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be >= 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be >= 0");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
}

ModelConfig joint_sent(ModelConfig base) {
  base.alpha = 1.0;
  base.beta = 0.0;
  base.gamma = 0.0;
  return base;
}

ModelConfig joint_doc(ModelConfig base) {
  base.alpha = 0.0;
  base.beta = 0.0;
  base.gamma = 0.0;
  return base;
}

ModelConfig joint(ModelConfig base) {
  base.beta = 0.0;
  base.gamma = 0.0;
  return base;
}

ModelConfig joint_struc(ModelConfig base) { return base; }

}  // namespace polyscale::hiermodel
