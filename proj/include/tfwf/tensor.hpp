/* Copyright 2026 The TFWaveFormer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

// Dense row-major tensor with define-by-run reverse-mode differentiation.
//
// A Tensor is a cheap handle onto a shared Node. Operations in ops.hpp
// create new nodes that remember their inputs and a closure that pushes the
// output gradient back into them. backward() walks the recorded graph once in
// reverse topological order.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tfwf/errors.hpp"

namespace tfwf {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace detail {

inline bool& grad_mode_flag() {
  thread_local bool enabled = true;
  return enabled;
}

inline bool& debug_checks_flag() {
  thread_local bool enabled = false;
  return enabled;
}

}  // namespace detail

inline bool grad_enabled() { return detail::grad_mode_flag(); }

// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode_flag()) { detail::grad_mode_flag() = false; }
  ~NoGradGuard() { detail::grad_mode_flag() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// When enabled, every operation rejects non-finite inputs with NumericError.
inline void set_debug_checks(bool enabled) { detail::debug_checks_flag() = enabled; }
inline bool debug_checks() { return detail::debug_checks_flag(); }

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::optional<std::vector<T>> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  std::vector<T>& ensure_grad() {
    if (!grad) grad.emplace(data.size(), T(0));
    return *grad;
  }
  bool is_leaf() const { return !backward_fn; }
};

template <typename T = float>
class Tensor {
 public:
  using value_type = T;
  using NodePtr = std::shared_ptr<Node<T>>;

  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor from_data(Shape shape, std::vector<T> data, bool requires_grad = false) {
    if (shape_size(shape) != data.size()) {
      throw DimensionError("tensor data length " + std::to_string(data.size()) +
                           " does not match shape " + shape_str(shape));
    }
    auto node = std::make_shared<Node<T>>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
  }
  static Tensor full(Shape shape, T value, bool requires_grad = false) {
    const auto n = shape_size(shape);
    return from_data(std::move(shape), std::vector<T>(n, value), requires_grad);
  }
  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return full(std::move(shape), T(0), requires_grad);
  }
  static Tensor scalar(T value, bool requires_grad = false) {
    return from_data({}, {value}, requires_grad);
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t size() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  std::span<T> mutable_data() { return node_->data; }
  T operator[](std::size_t i) const { return node_->data[i]; }
  T item() const {
    if (size() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
    return node_->data[0];
  }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value) { node_->requires_grad = value; }
  bool has_grad() const { return node_->grad.has_value(); }
  std::span<const T> grad() const {
    if (!node_->grad) throw ContractError("tensor has no gradient");
    return *node_->grad;
  }
  std::span<T> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad() { node_->grad.reset(); }
  const char* op() const { return node_->op; }

  // Leaf copy sharing nothing with this tensor's graph.
  Tensor detach() const { return from_data(shape(), node_->data, false); }

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

namespace detail {

template <typename T>
void check_finite(const Tensor<T>& t, const char* op) {
  for (T v : t.data()) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite input to ") + op + " (shape " +
                         shape_str(t.shape()) + ")");
    }
  }
}

// Builds an op result. The backward closure is only attached when gradient
// recording is on and at least one input requires a gradient.
template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> data,
                      std::vector<Tensor<T>> inputs, std::function<void(Node<T>&)> backward) {
  if (debug_checks()) {
    for (const auto& in : inputs) check_finite(in, op);
  }
  auto node = std::make_shared<Node<T>>();
  node->op = op;
  node->shape = std::move(shape);
  node->data = std::move(data);
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(inputs.size());
    for (auto& in : inputs) node->parents.push_back(in.node());
    node->backward_fn = std::move(backward);
  }
  return Tensor<T>(std::move(node));
}

// Gradient buffer of parent i, or nullptr when that parent does not need one.
template <typename T>
std::vector<T>* parent_grad(Node<T>& self, std::size_t i) {
  auto& p = self.parents[i];
  if (!p->requires_grad) return nullptr;
  return &p->ensure_grad();
}

}  // namespace detail

// Populates grad for every requires_grad ancestor of `loss`. Intermediate
// gradients are recomputed from scratch; leaf gradients accumulate across
// calls until zero_grad().
template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) return;

  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{loss.node().get(), 0}};
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node<T>* n : order) {
    if (!n->is_leaf()) n->grad.emplace(n->data.size(), T(0));
  }
  loss.node()->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (!(*it)->is_leaf()) (*it)->backward_fn(**it);
  }
}

}  // namespace tfwf
