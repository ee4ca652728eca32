#include "polyscale/diffcore/tape.hpp"

#include <cmath>
#include <string>

#include "polyscale/error.hpp"

namespace polyscale::diffcore {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError(std::string("shape mismatch in ") + op + ": " +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

Eigen::VectorXd stable_softmax(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  Eigen::VectorXd e = (z.array() - m).exp();
  return e / e.sum();
}

double log_sum_exp(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

}  // namespace

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

bool Tape::needs(std::initializer_list<std::size_t> ids) const {
  for (auto id : ids) {
    if (nodes_[id].needs_grad) return true;
  }
  return false;
}

Var Tape::constant(Tensor value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(ParameterStore& store, std::size_t index) {
  const auto key = std::make_pair(static_cast<const ParameterStore*>(&store), index);
  if (auto it = param_nodes_.find(key); it != param_nodes_.end()) return Var{it->second};
  param_nodes_.emplace(key, nodes_.size());
  Node n;
  n.op = Op::Param;
  n.value = store[index].value;
  n.store = &store;
  n.param = index;
  n.needs_grad = store[index].trainable;
  return push(std::move(n));
}

Var Tape::row(ParameterStore& store, std::size_t index, Eigen::Index r) {
  const auto& p = store[index];
  if (r < 0 || r >= p.value.rows()) throw ValidationError("row lookup out of range");
  Node n;
  n.op = Op::Row;
  n.value = p.value.row(r).transpose();
  n.store = &store;
  n.param = index;
  n.index = r;
  n.needs_grad = p.trainable;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  const auto& va = value(a);
  const auto& vb = value(b);
  if (va.cols() != vb.rows()) throw ValidationError("shape mismatch in matmul");
  Node n;
  n.op = Op::MatMul;
  n.value = va * vb;
  n.inputs = {a.id, b.id};
  n.needs_grad = needs({a.id, b.id});
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  Node n;
  n.op = Op::Add;
  n.value = value(a) + value(b);
  n.inputs = {a.id, b.id};
  n.needs_grad = needs({a.id, b.id});
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  Node n;
  n.op = Op::Sub;
  n.value = value(a) - value(b);
  n.inputs = {a.id, b.id};
  n.needs_grad = needs({a.id, b.id});
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  require_same_shape(value(a), value(b), "mul");
  Node n;
  n.op = Op::Mul;
  n.value = value(a).cwiseProduct(value(b));
  n.inputs = {a.id, b.id};
  n.needs_grad = needs({a.id, b.id});
  return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
  Node n;
  n.op = Op::Scale;
  n.value = c * value(a);
  n.scalar = c;
  n.inputs = {a.id};
  n.needs_grad = needs({a.id});
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::Sigmoid;
  n.value = value(a).unaryExpr([](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  n.inputs = {a.id};
  n.needs_grad = needs({a.id});
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::Tanh;
  n.value = value(a).array().tanh().matrix();
  n.inputs = {a.id};
  n.needs_grad = needs({a.id});
  return push(std::move(n));
}

Var Tape::softmax(Var a) {
  if (value(a).cols() != 1) throw ValidationError("softmax expects a column vector");
  Node n;
  n.op = Op::Softmax;
  n.value = stable_softmax(value(a));
  n.inputs = {a.id};
  n.needs_grad = needs({a.id});
  return push(std::move(n));
}

Var Tape::log(Var a) {
  Node n;
  n.op = Op::Log;
  n.value = value(a).array().log().matrix();
  n.inputs = {a.id};
  n.needs_grad = needs({a.id});
  return push(std::move(n));
}

Var Tape::square(Var a) {
  Node n;
  n.op = Op::Square;
  n.value = value(a).array().square().matrix();
  n.inputs = {a.id};
  n.needs_grad = needs({a.id});
  return push(std::move(n));
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ValidationError("concat of nothing");
  Eigen::Index rows = 0;
  for (auto p : parts) {
    if (value(p).cols() != 1) throw ValidationError("concat expects column vectors");
    rows += value(p).rows();
  }
  Node n;
  n.op = Op::Concat;
  n.value.resize(rows, 1);
  Eigen::Index offset = 0;
  for (auto p : parts) {
    const auto& v = value(p);
    n.value.block(offset, 0, v.rows(), 1) = v;
    offset += v.rows();
    n.inputs.push_back(p.id);
    n.needs_grad = n.needs_grad || nodes_[p.id].needs_grad;
  }
  return push(std::move(n));
}

Var Tape::mean(std::span<const Var> parts) {
  if (parts.empty()) throw ValidationError("mean of nothing");
  Node n;
  n.op = Op::Mean;
  n.value = value(parts[0]);
  n.inputs.push_back(parts[0].id);
  n.needs_grad = nodes_[parts[0].id].needs_grad;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    require_same_shape(n.value, value(parts[i]), "mean");
    n.value += value(parts[i]);
    n.inputs.push_back(parts[i].id);
    n.needs_grad = n.needs_grad || nodes_[parts[i].id].needs_grad;
  }
  n.value /= static_cast<double>(parts.size());
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  Node n;
  n.op = Op::Sum;
  n.value = Tensor::Constant(1, 1, value(a).sum());
  n.inputs = {a.id};
  n.needs_grad = needs({a.id});
  return push(std::move(n));
}

Var Tape::pick(Var a, Eigen::Index i) {
  const auto& v = value(a);
  if (v.cols() != 1 || i < 0 || i >= v.rows()) throw ValidationError("pick out of range");
  Node n;
  n.op = Op::Pick;
  n.value = Tensor::Constant(1, 1, v(i, 0));
  n.index = i;
  n.inputs = {a.id};
  n.needs_grad = needs({a.id});
  return push(std::move(n));
}

Var Tape::cross_entropy(Var logits, Eigen::Index gold) {
  const auto& z = value(logits);
  if (z.cols() != 1 || gold < 0 || gold >= z.rows()) {
    throw ValidationError("cross-entropy gold class out of range");
  }
  Node n;
  n.op = Op::CrossEntropy;
  n.value = Tensor::Constant(1, 1, log_sum_exp(z.col(0)) - z(gold, 0));
  n.index = gold;
  n.inputs = {logits.id};
  n.needs_grad = needs({logits.id});
  return push(std::move(n));
}

double Tape::scalar(Var v) const {
  const auto& t = value(v);
  if (t.size() != 1) throw ValidationError("value is not a scalar");
  return t(0, 0);
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  auto& node = nodes_[id];
  if (!node.needs_grad) return;
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

void Tape::backward(Var root) {
  if (value(root).size() != 1) {
    throw ValidationError("backward requires a scalar (1x1) loss root");
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[root.id].needs_grad) return;
  nodes_[root.id].grad = Tensor::Ones(1, 1);

  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Param:
        n.store->operator[](n.param).grad += g;
        break;
      case Op::Row:
        n.store->operator[](n.param).grad.row(n.index) += g.transpose();
        break;
      case Op::MatMul: {
        const std::size_t a = n.inputs[0], b = n.inputs[1];
        if (nodes_[a].needs_grad) accumulate(a, g * nodes_[b].value.transpose());
        if (nodes_[b].needs_grad) accumulate(b, nodes_[a].value.transpose() * g);
        break;
      }
      case Op::Add:
        accumulate(n.inputs[0], g);
        accumulate(n.inputs[1], g);
        break;
      case Op::Sub:
        accumulate(n.inputs[0], g);
        if (nodes_[n.inputs[1]].needs_grad) accumulate(n.inputs[1], -g);
        break;
      case Op::Mul: {
        const std::size_t a = n.inputs[0], b = n.inputs[1];
        if (nodes_[a].needs_grad) accumulate(a, g.cwiseProduct(nodes_[b].value));
        if (nodes_[b].needs_grad) accumulate(b, g.cwiseProduct(nodes_[a].value));
        break;
      }
      case Op::Scale:
        accumulate(n.inputs[0], n.scalar * g);
        break;
      case Op::Sigmoid:
        accumulate(n.inputs[0],
                   (g.array() * n.value.array() * (1.0 - n.value.array())).matrix());
        break;
      case Op::Tanh:
        accumulate(n.inputs[0], (g.array() * (1.0 - n.value.array().square())).matrix());
        break;
      case Op::Softmax: {
        const double dot = (g.array() * n.value.array()).sum();
        accumulate(n.inputs[0], (n.value.array() * (g.array() - dot)).matrix());
        break;
      }
      case Op::Log:
        accumulate(n.inputs[0], (g.array() / nodes_[n.inputs[0]].value.array()).matrix());
        break;
      case Op::Square:
        accumulate(n.inputs[0],
                   (2.0 * g.array() * nodes_[n.inputs[0]].value.array()).matrix());
        break;
      case Op::Concat: {
        Eigen::Index offset = 0;
        for (auto in : n.inputs) {
          const auto rows = nodes_[in].value.rows();
          if (nodes_[in].needs_grad) accumulate(in, g.block(offset, 0, rows, 1));
          offset += rows;
        }
        break;
      }
      case Op::Mean: {
        const Tensor share = g / static_cast<double>(n.inputs.size());
        for (auto in : n.inputs) accumulate(in, share);
        break;
      }
      case Op::Sum: {
        const auto& in = nodes_[n.inputs[0]].value;
        accumulate(n.inputs[0], Tensor::Constant(in.rows(), in.cols(), g(0, 0)));
        break;
      }
      case Op::Pick: {
        const auto& in = nodes_[n.inputs[0]].value;
        Tensor d = Tensor::Zero(in.rows(), in.cols());
        d(n.index, 0) = g(0, 0);
        accumulate(n.inputs[0], d);
        break;
      }
      case Op::CrossEntropy: {
        const auto& z = nodes_[n.inputs[0]].value;
        Tensor d = stable_softmax(z.col(0));
        d(n.index, 0) -= 1.0;
        accumulate(n.inputs[0], g(0, 0) * d);
        break;
      }
    }
  }
}

SoftmaxXent softmax_xent(const Eigen::VectorXd& logits, Eigen::Index gold) {
  if (gold < 0 || gold >= logits.size()) {
    throw ValidationError("gold class " + std::to_string(gold) + " out of range");
  }
  if (!logits.allFinite()) throw ValidationError("logits must be finite");
  SoftmaxXent out;
  out.probabilities = stable_softmax(logits);
  out.loss = log_sum_exp(logits) - logits(gold);
  return out;
}

}  // namespace polyscale::diffcore
