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

#ifndef PCG_TENSOR_H_
#define PCG_TENSOR_H_

// Dense float64 tensors with define-by-run reverse-mode differentiation.
//
// Every op that consumes a tensor with requires_grad() while a Tape is
// active records itself on that tape. Tape::backward() then walks the record
// in reverse and accumulates gradients into every reachable tensor that
// requires them. Without an active tape, ops are plain value computations.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pcg {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape &shape);
std::string shape_string(const Shape &shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something is accumulated
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Propagates this node's grad into its parents.
  std::function<void(Node &)> backward;

  // Returns the grad buffer, allocating zeros on first use.
  std::vector<double> &grad_buffer();
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape &shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  // In-place access for parameter initialization and optimizer updates.
  // Never mutate a tensor that is referenced by a live tape.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  // Gradient values; all zeros when nothing has been accumulated.
  std::vector<double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Deep copy of the values with no tape history and no grad requirement.
  Tensor detach() const;

  // Shared identity; two handles to the same node compare equal.
  bool same_node(const Tensor &other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  friend Tensor make_op_result(const char *, Shape, std::vector<double>,
                               std::vector<Tensor>,
                               std::function<void(detail::Node &)>);
  friend class Tape;

  std::shared_ptr<detail::Node> node_;
};

// Ordered record of recorded operations. Constructing a Tape makes it the
// current tape of the calling thread until it is destroyed.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  // Accumulates dLoss/dTensor into every reachable tensor that requires
  // grad. A tape supports one backward pass until reset().
  void backward(const Tensor &loss);
  void reset();
  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  static Tape *current();

  // Suspends recording on this thread for the guard's lifetime.
  class Pause {
   public:
    Pause();
    ~Pause();
    Pause(const Pause &) = delete;
    Pause &operator=(const Pause &) = delete;

   private:
    Tape *saved_;
  };

 private:
  friend Tensor make_op_result(const char *, Shape, std::vector<double>,
                               std::vector<Tensor>,
                               std::function<void(detail::Node &)>);
  std::vector<std::shared_ptr<detail::Node>> nodes_;
  Tape *previous_;
  bool consumed_ = false;
};

// Runs backward on the current tape.
void backward(const Tensor &loss);

// Builds an op output, checks finiteness and records it on the current tape
// when any input requires grad. Exposed for ops defined outside tensor.cc.
Tensor make_op_result(const char *op, Shape shape, std::vector<double> values,
                      std::vector<Tensor> inputs,
                      std::function<void(detail::Node &)> backward);

// ---- Linear algebra ------------------------------------------------------

Tensor matmul(const Tensor &a, const Tensor &b);
Tensor transpose(const Tensor &a);

// ---- Elementwise ---------------------------------------------------------
// Binary ops accept identical shapes, a right operand matching the trailing
// axes of the left one (broadcast along the leading axis), or a one-element
// right operand.

Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);
Tensor scale(const Tensor &a, double factor);
Tensor add_scalar(const Tensor &a, double offset);
Tensor relu(const Tensor &a);
Tensor tanh(const Tensor &a);
Tensor sigmoid(const Tensor &a);
Tensor exp(const Tensor &a);
Tensor log(const Tensor &a);
Tensor softplus(const Tensor &a);

inline Tensor operator+(const Tensor &a, const Tensor &b) { return add(a, b); }
inline Tensor operator-(const Tensor &a, const Tensor &b) { return sub(a, b); }
inline Tensor operator*(const Tensor &a, const Tensor &b) { return mul(a, b); }
inline Tensor operator*(double c, const Tensor &a) { return scale(a, c); }

// ---- Reductions and normalization ----------------------------------------

Tensor sum(const Tensor &a);
Tensor sum(const Tensor &a, std::size_t axis);
Tensor mean(const Tensor &a);
Tensor mean(const Tensor &a, std::size_t axis);
Tensor logsumexp(const Tensor &a, std::size_t axis);
Tensor softmax(const Tensor &a, std::size_t axis);
Tensor log_softmax(const Tensor &a, std::size_t axis);

inline constexpr double kLayerNormEps = 1e-5;
// Normalizes over the last axis, then applies gain and bias.
Tensor layer_norm(const Tensor &x, const Tensor &gain, const Tensor &bias,
                  double eps = kLayerNormEps);

enum class Reduction { kSum, kMean };
// -log softmax(logits)[t, targets[t]] summed (default) or averaged over rows.
Tensor cross_entropy(const Tensor &logits, std::span<const std::size_t> targets,
                     Reduction reduction = Reduction::kSum);

// ---- Shape manipulation ----------------------------------------------------

Tensor reshape(const Tensor &a, Shape shape);
Tensor concat(const std::vector<Tensor> &parts, std::size_t axis);
Tensor slice(const Tensor &a, std::size_t axis, std::size_t begin,
             std::size_t end);
// Rows of a 2-D table selected by id: result [ids.size() x table.dim(1)].
Tensor gather_rows(const Tensor &table, std::span<const std::size_t> ids);
// Elements at flat row-major positions: result [indices.size()].
Tensor take(const Tensor &a, std::span<const std::size_t> indices);

}  // namespace pcg

#endif  // PCG_TENSOR_H_
