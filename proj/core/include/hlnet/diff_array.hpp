#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hlnet {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense float64 array that records the operations producing it so that a
// scalar result can be differentiated in reverse mode. Copies share storage;
// an array is a handle onto a node of the computation graph.
//
// Arrays are treated as a stack of rows along the last axis: a shape
// (a, b, c) array has a*b rows of c columns. A 1-D array of length n is one
// row of n columns unless an op documents otherwise.
class DiffArray {
 public:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    bool is_leaf = true;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    void ensure_grad() {
      if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
  };

  DiffArray() = default;

  static DiffArray constant(Shape shape, std::vector<double> values);
  static DiffArray leaf(Shape shape, std::vector<double> values, bool requires_grad);
  static DiffArray zeros(Shape shape, bool requires_grad = false);
  static DiffArray scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->value.size(); }
  std::size_t ndim() const { return node_->shape.size(); }
  std::size_t cols() const;
  std::size_t rows() const;

  std::span<const double> values() const { return node_->value; }
  // Direct write access; only meaningful on leaves (parameters).
  std::span<double> mutable_values() { return node_->value; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  // Gradient buffer; zeros if backward() never reached this array.
  std::vector<double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  double item() const;
  double operator[](std::size_t i) const { return node_->value[i]; }
  double at(std::size_t row, std::size_t col) const { return node_->value[row * cols() + col]; }

  // Reverse pass from a scalar. Leaf gradients accumulate across calls;
  // intermediate gradients are recomputed each call.
  void backward() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

  // Builds an op result. When gradient recording is off or no input requires
  // a gradient, parents and the backward closure are dropped.
  static DiffArray make_result(Shape shape, std::vector<double> values,
                               std::vector<std::shared_ptr<Node>> parents,
                               std::function<void(Node&)> backward_fn);

 private:
  explicit DiffArray(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  std::shared_ptr<Node> node_;
};

// Thread-local switch for graph recording. Evaluation code wraps forward passes
// in NoGradGuard to skip building the backward graph.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool on);
};

class NoGradGuard {
 public:
  NoGradGuard() : previous_(GradMode::enabled()) { GradMode::set_enabled(false); }
  ~NoGradGuard() { GradMode::set_enabled(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace hlnet
