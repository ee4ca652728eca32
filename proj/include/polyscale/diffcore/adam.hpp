#pragma once

#include <vector>

#include "polyscale/diffcore/params.hpp"

namespace polyscale::diffcore {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // global gradient-norm clip; <= 0 disables
};

/// Adaptive moment estimation over the trainable entries of a store.
class Adam {
 public:
  Adam(const ParameterStore& store, AdamConfig config);

  /// Clips, applies one update from the current gradients and returns the
  /// pre-clip gradient norm. Gradients are left untouched.
  double step(ParameterStore& store);

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long t_ = 0;
};

}  // namespace polyscale::diffcore
