#include "polyscale/diffcore/params.hpp"

#include <cmath>

#include "polyscale/error.hpp"

namespace polyscale::diffcore {

std::size_t ParameterStore::add(std::string name, Tensor init, bool trainable) {
  if (index_.count(name) > 0) throw ValidationError("duplicate parameter name " + name);
  const std::size_t id = params_.size();
  index_.emplace(name, id);
  Tensor grad = Tensor::Zero(init.rows(), init.cols());
  params_.push_back({std::move(name), std::move(init), std::move(grad), trainable});
  return id;
}

std::optional<std::size_t> ParameterStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Parameter& ParameterStore::at(std::string_view name) {
  if (auto i = find(name)) return params_[*i];
  throw ValidationError("unknown parameter " + std::string(name));
}

const Parameter& ParameterStore::at(std::string_view name) const {
  if (auto i = find(name)) return params_[*i];
  throw ValidationError("unknown parameter " + std::string(name));
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

double ParameterStore::grad_norm() const {
  double sq = 0.0;
  for (const auto& p : params_) {
    if (p.trainable) sq += p.grad.squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace polyscale::diffcore
