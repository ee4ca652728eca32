#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace polyscale::diffcore {

/// Dense real tensor of rank <= 2; column vectors are n x 1.
using Tensor = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value
  bool trainable = true;
};

/// Named parameters in insertion order. Iteration order is fixed, which keeps
/// optimisation and serialisation deterministic.
class ParameterStore {
 public:
  /// Throws ValidationError on a duplicate name.
  std::size_t add(std::string name, Tensor init, bool trainable = true);

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  double grad_norm() const;

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace polyscale::diffcore
