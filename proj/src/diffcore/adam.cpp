#include "polyscale/diffcore/adam.hpp"

#include <cmath>

namespace polyscale::diffcore {

Adam::Adam(const ParameterStore& store, AdamConfig config) : config_(config) {
  for (const auto& p : store) {
    m_.push_back(Tensor::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Tensor::Zero(p.value.rows(), p.value.cols()));
  }
}

double Adam::step(ParameterStore& store) {
  const double norm = store.grad_norm();
  double factor = 1.0;
  if (config_.clip_norm > 0.0 && norm > config_.clip_norm) factor = config_.clip_norm / norm;
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < store.size(); ++k) {
    auto& p = store[k];
    if (!p.trainable) continue;
    const Tensor g = factor * p.grad;
    m_[k] = config_.beta1 * m_[k] + (1.0 - config_.beta1) * g;
    v_[k] = config_.beta2 * v_[k] + (1.0 - config_.beta2) * g.cwiseProduct(g);
    p.value.array() -= config_.learning_rate * (m_[k].array() / c1) /
                       ((v_[k].array() / c2).sqrt() + config_.epsilon);
  }
  return norm;
}

}  // namespace polyscale::diffcore
