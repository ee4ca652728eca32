#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "polyscale/diffcore/params.hpp"

namespace polyscale::diffcore {

/// Handle to a node on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode tape over a fixed operation set. Every operation evaluates
/// eagerly and records how to push gradients back to its inputs; backward()
/// then accumulates into the gradient slots of the ParameterStore entries
/// the root depends on. A tape is single-use and single-threaded.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to store[index]; repeated calls return the same node.
  /// Frozen parameters behave like constants.
  Var param(ParameterStore& store, std::size_t index);
  /// Row `row` of store[index], as a column vector (embedding lookup).
  Var row(ParameterStore& store, std::size_t index, Eigen::Index row);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, double c);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var softmax(Var a);  // over a column vector
  Var log(Var a);
  Var square(Var a);
  Var concat(std::span<const Var> parts);  // stacks column vectors
  Var mean(std::span<const Var> parts);    // elementwise mean
  Var sum(Var a);                          // 1 x 1
  Var pick(Var a, Eigen::Index i);         // entry i of a column vector, 1 x 1
  /// -log softmax(logits)[gold], computed stably. 1 x 1.
  Var cross_entropy(Var logits, Eigen::Index gold);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Throws ValidationError unless `root` is 1 x 1. Gradients are added to
  /// the existing contents of the parameter gradient slots.
  void backward(Var root);

 private:
  enum class Op {
    Constant, Param, Row, MatMul, Add, Sub, Mul, Scale, Sigmoid, Tanh, Softmax, Log,
    Square, Concat, Mean, Sum, Pick, CrossEntropy
  };

  struct Node {
    Op op = Op::Constant;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;
    double scalar = 0.0;
    Eigen::Index index = 0;
    ParameterStore* store = nullptr;
    std::size_t param = 0;
    bool needs_grad = false;
  };

  Var push(Node node);
  bool needs(std::initializer_list<std::size_t> ids) const;
  void accumulate(std::size_t id, const Tensor& g);

  std::vector<Node> nodes_;
  std::map<std::pair<const ParameterStore*, std::size_t>, std::size_t> param_nodes_;
};

/// Probabilities and cross-entropy of a logit vector against class `gold`.
struct SoftmaxXent {
  Eigen::VectorXd probabilities;
  double loss = 0.0;
};

/// Throws ValidationError when gold is out of range or logits are not finite.
SoftmaxXent softmax_xent(const Eigen::VectorXd& logits, Eigen::Index gold);

}  // namespace polyscale::diffcore
