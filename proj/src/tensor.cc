// Copyright 2026 The PCG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pcg/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Core>

#include "pcg/errors.h"

namespace pcg {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

thread_local Tape *current_tape = nullptr;

using detail::Node;

std::shared_ptr<Node> new_node(Shape shape, std::vector<double> values,
                               bool requires_grad) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_string(shape) + " holds " +
                         std::to_string(shape_size(shape)) +
                         " values, got " + std::to_string(values.size()));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

void require_defined(const Tensor &t, const char *op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
}

void require_rank(const Tensor &t, std::size_t rank, const char *op) {
  require_defined(t, op);
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got " +
                         shape_string(t.shape()));
  }
}

// Splits a shape around `axis` into (outer, extent, inner) counts.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const Shape &shape, std::size_t axis, const char *op) {
  if (axis >= shape.size()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for " + shape_string(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

Shape drop_axis(const Shape &shape, std::size_t axis) {
  Shape out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != axis) out.push_back(shape[i]);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

enum class Broadcast { kSame, kLeading, kScalar };

Broadcast classify(const Tensor &a, const Tensor &b, const char *op) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() == b.shape()) return Broadcast::kSame;
  if (b.size() == 1) return Broadcast::kScalar;
  if (a.rank() >= 2 &&
      Shape(a.shape().begin() + 1, a.shape().end()) == b.shape()) {
    return Broadcast::kLeading;
  }
  throw DimensionError(std::string(op) + ": cannot combine " +
                       shape_string(a.shape()) + " with " +
                       shape_string(b.shape()));
}

inline std::size_t rhs_index(Broadcast mode, std::size_t i, std::size_t n) {
  switch (mode) {
    case Broadcast::kSame:
      return i;
    case Broadcast::kScalar:
      return 0;
    case Broadcast::kLeading:
      return i % n;
  }
  return i;
}

template <typename Fwd, typename Dfx>
Tensor unary(const char *op, const Tensor &a, Fwd fwd, Dfx dfx) {
  require_defined(a, op);
  const auto x = a.data();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  return make_op_result(
      op, a.shape(), std::move(y), {a}, [dfx](Node &self) {
        Node &p = *self.parents[0];
        if (!p.requires_grad) return;
        auto &g = p.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          g[i] += self.grad[i] * dfx(p.value[i], self.value[i]);
        }
      });
}

}  // namespace

std::size_t shape_size(const Shape &shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::vector<double> &detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

// ---- Tensor ---------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, value),
                         requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values,
                    bool requires_grad) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("non-finite tensor value");
  }
  return Tensor(new_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

const Shape &Tensor::shape() const {
  require_defined(*this, "shape");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " +
                         shape_string(shape()));
  }
  return node_->shape[axis];
}

std::size_t Tensor::size() const { return shape_size(shape()); }

std::span<const double> Tensor::data() const {
  require_defined(*this, "data");
  return node_->value;
}

std::span<double> Tensor::mutable_data() {
  require_defined(*this, "mutable_data");
  return node_->value;
}

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on tensor of shape " + shape_string(shape()));
  }
  return node_->value[0];
}

double Tensor::at(std::size_t i) const {
  if (i >= size()) throw IndexError("flat index out of range");
  return node_->value[i];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  if (rank() != 2 || i >= dim(0) || j >= dim(1)) {
    throw IndexError("2-D index out of range for " + shape_string(shape()));
  }
  return node_->value[i * dim(1) + j];
}

bool Tensor::requires_grad() const {
  return defined() && node_->requires_grad;
}

void Tensor::set_requires_grad(bool value) {
  require_defined(*this, "set_requires_grad");
  node_->requires_grad = value;
}

bool Tensor::has_grad() const { return defined() && !node_->grad.empty(); }

std::vector<double> Tensor::grad() const {
  require_defined(*this, "grad");
  if (node_->grad.empty()) return std::vector<double>(size(), 0.0);
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  require_defined(*this, "mutable_grad");
  return node_->grad_buffer();
}

void Tensor::zero_grad() {
  if (defined()) node_->grad.clear();
}

Tensor Tensor::detach() const {
  require_defined(*this, "detach");
  return Tensor(new_node(node_->shape, node_->value, false));
}

// ---- Tape -------------------------------------------------------------------

Tape::Tape() : previous_(current_tape) { current_tape = this; }

Tape::~Tape() { current_tape = previous_; }

Tape *Tape::current() { return current_tape; }

Tape::Pause::Pause() : saved_(current_tape) { current_tape = nullptr; }

Tape::Pause::~Pause() { current_tape = saved_; }

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

void Tape::backward(const Tensor &loss) {
  require_defined(loss, "backward");
  if (consumed_) {
    throw ContractError("backward: tape already consumed; call reset()");
  }
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be scalar, got " +
                        shape_string(loss.shape()));
  }
  consumed_ = true;
  if (!loss.requires_grad()) return;
  loss.node_->grad_buffer()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node &node = **it;
    if (node.grad.empty() || !node.backward) continue;
    node.backward(node);
  }
}

void backward(const Tensor &loss) {
  Tape *tape = Tape::current();
  if (tape == nullptr) throw ContractError("backward: no active tape");
  tape->backward(loss);
}

Tensor make_op_result(const char *op, Shape shape, std::vector<double> values,
                      std::vector<Tensor> inputs,
                      std::function<void(Node &)> backward_fn) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + ": produced a non-finite value");
    }
  }
  Tape *tape = current_tape;
  bool record = false;
  if (tape != nullptr) {
    for (const auto &in : inputs) record = record || in.requires_grad();
  }
  auto node = new_node(std::move(shape), std::move(values), record);
  if (record) {
    node->parents.reserve(inputs.size());
    for (auto &in : inputs) node->parents.push_back(in.node_);
    node->backward = std::move(backward_fn);
    tape->nodes_.push_back(node);
  }
  return Tensor(std::move(node));
}

// ---- Linear algebra ------------------------------------------------------

Tensor matmul(const Tensor &a, const Tensor &b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ: " +
                         shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() =
      ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  return make_op_result(
      "matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node &self) {
        Node &pa = *self.parents[0];
        Node &pb = *self.parents[1];
        ConstMap g(self.grad.data(), m, n);
        if (pa.requires_grad) {
          MutMap(pa.grad_buffer().data(), m, k).noalias() +=
              g * ConstMap(pb.value.data(), k, n).transpose();
        }
        if (pb.requires_grad) {
          MutMap(pb.grad_buffer().data(), k, n).noalias() +=
              ConstMap(pa.value.data(), m, k).transpose() * g;
        }
      });
}

Tensor transpose(const Tensor &a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  MutMap(out.data(), n, m) = ConstMap(a.data().data(), m, n).transpose();
  return make_op_result("transpose", {n, m}, std::move(out), {a},
                        [m, n](Node &self) {
                          Node &p = *self.parents[0];
                          if (!p.requires_grad) return;
                          MutMap(p.grad_buffer().data(), m, n) +=
                              ConstMap(self.grad.data(), n, m).transpose();
                        });
}

// ---- Elementwise ---------------------------------------------------------

Tensor add(const Tensor &a, const Tensor &b) {
  const Broadcast mode = classify(a, b, "add");
  const auto x = a.data();
  const auto y = b.data();
  const std::size_t nb = y.size();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] + y[rhs_index(mode, i, nb)];
  }
  return make_op_result("add", a.shape(), std::move(out), {a, b},
                        [mode, nb](Node &self) {
                          Node &pa = *self.parents[0];
                          Node &pb = *self.parents[1];
                          if (pa.requires_grad) {
                            auto &g = pa.grad_buffer();
                            for (std::size_t i = 0; i < g.size(); ++i) {
                              g[i] += self.grad[i];
                            }
                          }
                          if (pb.requires_grad) {
                            auto &g = pb.grad_buffer();
                            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                              g[rhs_index(mode, i, nb)] += self.grad[i];
                            }
                          }
                        });
}

Tensor sub(const Tensor &a, const Tensor &b) {
  const Broadcast mode = classify(a, b, "sub");
  const auto x = a.data();
  const auto y = b.data();
  const std::size_t nb = y.size();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] - y[rhs_index(mode, i, nb)];
  }
  return make_op_result("sub", a.shape(), std::move(out), {a, b},
                        [mode, nb](Node &self) {
                          Node &pa = *self.parents[0];
                          Node &pb = *self.parents[1];
                          if (pa.requires_grad) {
                            auto &g = pa.grad_buffer();
                            for (std::size_t i = 0; i < g.size(); ++i) {
                              g[i] += self.grad[i];
                            }
                          }
                          if (pb.requires_grad) {
                            auto &g = pb.grad_buffer();
                            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                              g[rhs_index(mode, i, nb)] -= self.grad[i];
                            }
                          }
                        });
}

Tensor mul(const Tensor &a, const Tensor &b) {
  const Broadcast mode = classify(a, b, "mul");
  const auto x = a.data();
  const auto y = b.data();
  const std::size_t nb = y.size();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] * y[rhs_index(mode, i, nb)];
  }
  return make_op_result(
      "mul", a.shape(), std::move(out), {a, b}, [mode, nb](Node &self) {
        Node &pa = *self.parents[0];
        Node &pb = *self.parents[1];
        if (pa.requires_grad) {
          auto &g = pa.grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] += self.grad[i] * pb.value[rhs_index(mode, i, nb)];
          }
        }
        if (pb.requires_grad) {
          auto &g = pb.grad_buffer();
          for (std::size_t i = 0; i < self.grad.size(); ++i) {
            g[rhs_index(mode, i, nb)] += self.grad[i] * pa.value[i];
          }
        }
      });
}

Tensor scale(const Tensor &a, double factor) {
  return unary(
      "scale", a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor &a, double offset) {
  return unary(
      "add_scalar", a, [offset](double x) { return x + offset; },
      [](double, double) { return 1.0; });
}

Tensor relu(const Tensor &a) {
  return unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor &a) {
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor &a) {
  return unary(
      "sigmoid", a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor &a) {
  return unary(
      "exp", a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor &a) {
  return unary(
      "log", a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor softplus(const Tensor &a) {
  return unary(
      "softplus", a,
      [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
      [](double x, double) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      });
}

// ---- Reductions --------------------------------------------------------------

Tensor sum(const Tensor &a) {
  require_defined(a, "sum");
  double total = 0.0;
  for (double v : a.data()) total += v;
  return make_op_result("sum", {1}, {total}, {a}, [](Node &self) {
    Node &p = *self.parents[0];
    if (!p.requires_grad) return;
    auto &g = p.grad_buffer();
    for (auto &v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor &a) {
  require_defined(a, "mean");
  if (a.size() == 0) throw DimensionError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor sum(const Tensor &a, std::size_t axis) {
  require_defined(a, "sum");
  const AxisSplit s = split_axis(a.shape(), axis, "sum");
  const auto x = a.data();
  std::vector<double> out(s.outer * s.inner, 0.0);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t e = 0; e < s.extent; ++e) {
      const double *row = &x[(o * s.extent + e) * s.inner];
      double *dst = &out[o * s.inner];
      for (std::size_t i = 0; i < s.inner; ++i) dst[i] += row[i];
    }
  }
  return make_op_result("sum", drop_axis(a.shape(), axis), std::move(out), {a},
                        [s](Node &self) {
                          Node &p = *self.parents[0];
                          if (!p.requires_grad) return;
                          auto &g = p.grad_buffer();
                          for (std::size_t o = 0; o < s.outer; ++o) {
                            for (std::size_t e = 0; e < s.extent; ++e) {
                              for (std::size_t i = 0; i < s.inner; ++i) {
                                g[(o * s.extent + e) * s.inner + i] +=
                                    self.grad[o * s.inner + i];
                              }
                            }
                          }
                        });
}

Tensor mean(const Tensor &a, std::size_t axis) {
  const AxisSplit s = split_axis(a.shape(), axis, "mean");
  if (s.extent == 0) throw DimensionError("mean: empty axis");
  return scale(sum(a, axis), 1.0 / static_cast<double>(s.extent));
}

Tensor logsumexp(const Tensor &a, std::size_t axis) {
  require_defined(a, "logsumexp");
  const AxisSplit s = split_axis(a.shape(), axis, "logsumexp");
  if (s.extent == 0) throw DimensionError("logsumexp: empty axis");
  const auto x = a.data();
  std::vector<double> out(s.outer * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      auto at = [&](std::size_t e) { return x[(o * s.extent + e) * s.inner + i]; };
      double m = at(0);
      for (std::size_t e = 1; e < s.extent; ++e) m = std::max(m, at(e));
      double acc = 0.0;
      for (std::size_t e = 0; e < s.extent; ++e) acc += std::exp(at(e) - m);
      out[o * s.inner + i] = m + std::log(acc);
    }
  }
  return make_op_result(
      "logsumexp", drop_axis(a.shape(), axis), std::move(out), {a},
      [s](Node &self) {
        Node &p = *self.parents[0];
        if (!p.requires_grad) return;
        auto &g = p.grad_buffer();
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t i = 0; i < s.inner; ++i) {
            const double lse = self.value[o * s.inner + i];
            const double dy = self.grad[o * s.inner + i];
            for (std::size_t e = 0; e < s.extent; ++e) {
              const std::size_t k = (o * s.extent + e) * s.inner + i;
              g[k] += dy * std::exp(p.value[k] - lse);
            }
          }
        }
      });
}

Tensor softmax(const Tensor &a, std::size_t axis) {
  require_defined(a, "softmax");
  const AxisSplit s = split_axis(a.shape(), axis, "softmax");
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double m = x[base];
      for (std::size_t e = 1; e < s.extent; ++e) {
        m = std::max(m, x[base + e * s.inner]);
      }
      double total = 0.0;
      for (std::size_t e = 0; e < s.extent; ++e) {
        const double v = std::exp(x[base + e * s.inner] - m);
        out[base + e * s.inner] = v;
        total += v;
      }
      for (std::size_t e = 0; e < s.extent; ++e) out[base + e * s.inner] /= total;
    }
  }
  return make_op_result(
      "softmax", a.shape(), std::move(out), {a}, [s](Node &self) {
        Node &p = *self.parents[0];
        if (!p.requires_grad) return;
        auto &g = p.grad_buffer();
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t i = 0; i < s.inner; ++i) {
            const std::size_t base = o * s.extent * s.inner + i;
            double dot = 0.0;
            for (std::size_t e = 0; e < s.extent; ++e) {
              const std::size_t k = base + e * s.inner;
              dot += self.grad[k] * self.value[k];
            }
            for (std::size_t e = 0; e < s.extent; ++e) {
              const std::size_t k = base + e * s.inner;
              g[k] += self.value[k] * (self.grad[k] - dot);
            }
          }
        }
      });
}

Tensor log_softmax(const Tensor &a, std::size_t axis) {
  require_defined(a, "log_softmax");
  const AxisSplit s = split_axis(a.shape(), axis, "log_softmax");
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double m = x[base];
      for (std::size_t e = 1; e < s.extent; ++e) {
        m = std::max(m, x[base + e * s.inner]);
      }
      double total = 0.0;
      for (std::size_t e = 0; e < s.extent; ++e) {
        total += std::exp(x[base + e * s.inner] - m);
      }
      const double lse = m + std::log(total);
      for (std::size_t e = 0; e < s.extent; ++e) {
        out[base + e * s.inner] = x[base + e * s.inner] - lse;
      }
    }
  }
  return make_op_result(
      "log_softmax", a.shape(), std::move(out), {a}, [s](Node &self) {
        Node &p = *self.parents[0];
        if (!p.requires_grad) return;
        auto &g = p.grad_buffer();
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t i = 0; i < s.inner; ++i) {
            const std::size_t base = o * s.extent * s.inner + i;
            double total = 0.0;
            for (std::size_t e = 0; e < s.extent; ++e) {
              total += self.grad[base + e * s.inner];
            }
            for (std::size_t e = 0; e < s.extent; ++e) {
              const std::size_t k = base + e * s.inner;
              g[k] += self.grad[k] - std::exp(self.value[k]) * total;
            }
          }
        }
      });
}

Tensor layer_norm(const Tensor &x, const Tensor &gain, const Tensor &bias,
                  double eps) {
  require_defined(x, "layer_norm");
  require_defined(gain, "layer_norm");
  require_defined(bias, "layer_norm");
  const std::size_t width = x.shape().back();
  if (gain.size() != width || bias.size() != width) {
    throw DimensionError("layer_norm: gain/bias length must equal last axis " +
                         std::to_string(width));
  }
  const std::size_t rows = x.size() / width;
  const auto in = x.data();
  const auto gv = gain.data();
  const auto bv = bias.data();
  std::vector<double> normalized(in.size());
  std::vector<double> inv_std(rows);
  std::vector<double> out(in.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double *row = &in[r * width];
    double mu = 0.0;
    for (std::size_t j = 0; j < width; ++j) mu += row[j];
    mu /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t j = 0; j < width; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(width);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < width; ++j) {
      const double n = (row[j] - mu) * inv_std[r];
      normalized[r * width + j] = n;
      out[r * width + j] = n * gv[j] + bv[j];
    }
  }
  return make_op_result(
      "layer_norm", x.shape(), std::move(out), {x, gain, bias},
      [rows, width, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](Node &self) {
        Node &px = *self.parents[0];
        Node &pg = *self.parents[1];
        Node &pb = *self.parents[2];
        if (pg.requires_grad) {
          auto &g = pg.grad_buffer();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < width; ++j) {
              g[j] += self.grad[r * width + j] * normalized[r * width + j];
            }
          }
        }
        if (pb.requires_grad) {
          auto &g = pb.grad_buffer();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < width; ++j) {
              g[j] += self.grad[r * width + j];
            }
          }
        }
        if (!px.requires_grad) return;
        auto &g = px.grad_buffer();
        const double w = static_cast<double>(width);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_d = 0.0, mean_dn = 0.0;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = self.grad[r * width + j] * pg.value[j];
            mean_d += d;
            mean_dn += d * normalized[r * width + j];
          }
          mean_d /= w;
          mean_dn /= w;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = self.grad[r * width + j] * pg.value[j];
            g[r * width + j] +=
                inv_std[r] * (d - mean_d - normalized[r * width + j] * mean_dn);
          }
        }
      });
}

Tensor cross_entropy(const Tensor &logits, std::span<const std::size_t> targets,
                     Reduction reduction) {
  require_rank(logits, 2, "cross_entropy");
  const std::size_t rows = logits.dim(0), vocab = logits.dim(1);
  if (targets.size() != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(rows) + " rows");
  }
  for (auto t : targets) {
    if (t >= vocab) {
      throw IndexError("cross_entropy: target id " + std::to_string(t) +
                       " >= vocabulary size " + std::to_string(vocab));
    }
  }
  const auto x = logits.data();
  std::vector<double> probs(x.size());
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double *row = &x[r * vocab];
    const double m = *std::max_element(row, row + vocab);
    double acc = 0.0;
    for (std::size_t v = 0; v < vocab; ++v) acc += std::exp(row[v] - m);
    const double lse = m + std::log(acc);
    for (std::size_t v = 0; v < vocab; ++v) {
      probs[r * vocab + v] = std::exp(row[v] - lse);
    }
    total += lse - row[targets[r]];
  }
  const double factor =
      reduction == Reduction::kMean && rows > 0 ? 1.0 / static_cast<double>(rows)
                                                : 1.0;
  std::vector<std::size_t> ids(targets.begin(), targets.end());
  return make_op_result(
      "cross_entropy", {1}, {total * factor}, {logits},
      [rows, vocab, factor, ids = std::move(ids),
       probs = std::move(probs)](Node &self) {
        Node &p = *self.parents[0];
        if (!p.requires_grad) return;
        auto &g = p.grad_buffer();
        const double dy = self.grad[0] * factor;
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t v = 0; v < vocab; ++v) {
            g[r * vocab + v] += dy * probs[r * vocab + v];
          }
          g[r * vocab + ids[r]] -= dy;
        }
      });
}

// ---- Shape manipulation ----------------------------------------------------

Tensor reshape(const Tensor &a, Shape shape) {
  require_defined(a, "reshape");
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: " + shape_string(a.shape()) + " -> " +
                         shape_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_op_result("reshape", std::move(shape), std::move(out), {a},
                        [](Node &self) {
                          Node &p = *self.parents[0];
                          if (!p.requires_grad) return;
                          auto &g = p.grad_buffer();
                          for (std::size_t i = 0; i < g.size(); ++i) {
                            g[i] += self.grad[i];
                          }
                        });
}

Tensor concat(const std::vector<Tensor> &parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  for (const auto &p : parts) require_defined(p, "concat");
  const Shape &first = parts[0].shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range");
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::size_t> extents;
  for (const auto &p : parts) {
    const Shape &s = p.shape();
    bool compatible = s.size() == first.size();
    for (std::size_t i = 0; compatible && i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) compatible = false;
    }
    if (!compatible) {
      throw DimensionError("concat: incompatible shapes " + shape_string(first) +
                           " and " + shape_string(s));
    }
    extents.push_back(s[axis]);
    out_shape[axis] += s[axis];
  }
  const AxisSplit total = split_axis(out_shape, axis, "concat");
  std::vector<double> out(shape_size(out_shape));
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto x = parts[k].data();
    const std::size_t chunk = extents[k] * total.inner;
    for (std::size_t o = 0; o < total.outer; ++o) {
      std::copy_n(&x[o * chunk], chunk,
                  &out[o * total.extent * total.inner + offset * total.inner]);
    }
    offset += extents[k];
  }
  return make_op_result(
      "concat", std::move(out_shape), std::move(out), parts,
      [total, extents](Node &self) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < extents.size(); ++k) {
          Node &p = *self.parents[k];
          const std::size_t chunk = extents[k] * total.inner;
          if (p.requires_grad) {
            auto &g = p.grad_buffer();
            for (std::size_t o = 0; o < total.outer; ++o) {
              const double *src =
                  &self.grad[o * total.extent * total.inner + offset * total.inner];
              for (std::size_t i = 0; i < chunk; ++i) g[o * chunk + i] += src[i];
            }
          }
          offset += extents[k];
        }
      });
}

Tensor slice(const Tensor &a, std::size_t axis, std::size_t begin,
             std::size_t end) {
  require_defined(a, "slice");
  const AxisSplit s = split_axis(a.shape(), axis, "slice");
  if (begin > end || end > s.extent) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") outside axis of length " +
                         std::to_string(s.extent));
  }
  Shape out_shape = a.shape();
  out_shape[axis] = end - begin;
  const std::size_t chunk = (end - begin) * s.inner;
  const auto x = a.data();
  std::vector<double> out(s.outer * chunk);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(&x[(o * s.extent + begin) * s.inner], chunk, &out[o * chunk]);
  }
  return make_op_result(
      "slice", std::move(out_shape), std::move(out), {a},
      [s, begin, chunk](Node &self) {
        Node &p = *self.parents[0];
        if (!p.requires_grad) return;
        auto &g = p.grad_buffer();
        for (std::size_t o = 0; o < s.outer; ++o) {
          double *dst = &g[(o * s.extent + begin) * s.inner];
          for (std::size_t i = 0; i < chunk; ++i) dst[i] += self.grad[o * chunk + i];
        }
      });
}

Tensor gather_rows(const Tensor &table, std::span<const std::size_t> ids) {
  require_rank(table, 2, "gather_rows");
  const std::size_t rows = table.dim(0), width = table.dim(1);
  for (auto id : ids) {
    if (id >= rows) {
      throw IndexError("gather_rows: id " + std::to_string(id) +
                       " >= table rows " + std::to_string(rows));
    }
  }
  const auto x = table.data();
  std::vector<double> out(ids.size() * width);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    std::copy_n(&x[ids[r] * width], width, &out[r * width]);
  }
  std::vector<std::size_t> index(ids.begin(), ids.end());
  return make_op_result(
      "gather_rows", {ids.size(), width}, std::move(out), {table},
      [width, index = std::move(index)](Node &self) {
        Node &p = *self.parents[0];
        if (!p.requires_grad) return;
        auto &g = p.grad_buffer();
        for (std::size_t r = 0; r < index.size(); ++r) {
          for (std::size_t j = 0; j < width; ++j) {
            g[index[r] * width + j] += self.grad[r * width + j];
          }
        }
      });
}

Tensor take(const Tensor &a, std::span<const std::size_t> indices) {
  require_defined(a, "take");
  const auto x = a.data();
  std::vector<double> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= x.size()) {
      throw IndexError("take: index " + std::to_string(indices[i]) +
                       " out of range for " + shape_string(a.shape()));
    }
    out[i] = x[indices[i]];
  }
  std::vector<std::size_t> index(indices.begin(), indices.end());
  return make_op_result("take", {indices.size()}, std::move(out), {a},
                        [index = std::move(index)](Node &self) {
                          Node &p = *self.parents[0];
                          if (!p.requires_grad) return;
                          auto &g = p.grad_buffer();
                          for (std::size_t i = 0; i < index.size(); ++i) {
                            g[index[i]] += self.grad[i];
                          }
                        });
}

}  // namespace pcg
