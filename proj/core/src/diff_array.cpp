#include "hlnet/diff_array.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "hlnet/errors.hpp"

namespace hlnet {

namespace {
thread_local bool grad_mode_enabled = true;
}  // namespace

bool GradMode::enabled() { return grad_mode_enabled; }
void GradMode::set_enabled(bool on) { grad_mode_enabled = on; }

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

DiffArray DiffArray::constant(Shape shape, std::vector<double> values) {
  return leaf(std::move(shape), std::move(values), false);
}

DiffArray DiffArray::leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("array of shape " + shape_string(shape) + " given " +
                         std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return DiffArray(std::move(node));
}

DiffArray DiffArray::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return leaf(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

DiffArray DiffArray::scalar(double value) { return constant({}, {value}); }

std::size_t DiffArray::cols() const {
  const auto& s = node_->shape;
  return s.empty() ? 1 : s.back();
}

std::size_t DiffArray::rows() const {
  const std::size_t c = cols();
  return c == 0 ? 0 : size() / c;
}

std::vector<double> DiffArray::grad() const {
  if (!has_grad()) return std::vector<double>(size(), 0.0);
  return node_->grad;
}

std::span<double> DiffArray::mutable_grad() {
  node_->ensure_grad();
  return node_->grad;
}

void DiffArray::zero_grad() {
  if (has_grad()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

double DiffArray::item() const {
  if (size() != 1) {
    throw ContractError("item() on array of shape " + shape_string(shape()));
  }
  return node_->value[0];
}

DiffArray DiffArray::make_result(Shape shape, std::vector<double> values,
                                 std::vector<std::shared_ptr<Node>> parents,
                                 std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  bool needs = false;
  if (GradMode::enabled()) {
    for (const auto& p : parents) needs = needs || p->requires_grad;
  }
  if (needs) {
    node->requires_grad = true;
    node->is_leaf = false;
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return DiffArray(std::move(node));
}

void DiffArray::backward() const {
  if (size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_string(shape()));
  }
  if (!std::isfinite(node_->value[0])) {
    throw NumericError("backward() on non-finite loss");
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->is_leaf) n->grad.assign(n->value.size(), 0.0);
  }
  node_->ensure_grad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->is_leaf && n->backward_fn) {
      for (auto& p : n->parents) {
        if (p->requires_grad) p->ensure_grad();
      }
      n->backward_fn(*n);
    }
  }
}

}  // namespace hlnet
