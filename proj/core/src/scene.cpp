#include "hlnet/scene.hpp"

#include <algorithm>
#include <string>

#include "hlnet/errors.hpp"

namespace hlnet {

double iou(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  if (a == b) return 1.0;
  return inter / uni;
}

Box union_box(const Box& a, const Box& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

void SceneGraph::connect_all() {
  neighbors.assign(nodes.size(), {});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (i != j) neighbors[i].push_back(j);
    }
  }
}

void SceneGraph::validate() const {
  const std::size_t n = nodes.size();
  if (neighbors.size() != n) throw ContractError("neighbor table size differs from node count");
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i].id != i) throw ContractError("node ids must be 0..n-1 in order");
    if (!nodes[i].box.valid()) throw ContractError("degenerate box on node " + std::to_string(i));
    for (auto j : neighbors[i]) {
      if (j == i || j >= n) throw ContractError("bad neighbor " + std::to_string(j) + " of node " + std::to_string(i));
    }
  }
  for (const auto& t : gt_triplets) {
    if (t.subject == t.object || t.subject >= n || t.object >= n) {
      throw ContractError("triplet endpoints invalid: " + std::to_string(t.subject) + "->" +
                          std::to_string(t.object));
    }
  }
}

double homophily(const std::vector<int>& labels, const std::vector<std::vector<std::size_t>>& neighbors) {
  double total = 0.0;
  std::size_t eligible = 0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    if (neighbors[i].empty()) continue;
    std::size_t same = 0;
    for (auto j : neighbors[i]) same += labels[j] == labels[i] ? 1 : 0;
    total += static_cast<double>(same) / static_cast<double>(neighbors[i].size());
    ++eligible;
  }
  if (eligible == 0) throw UndefinedMetricError("homophily undefined: no node has a neighbor");
  return total / static_cast<double>(eligible);
}

double homophily(const SceneGraph& g) {
  std::vector<int> labels;
  labels.reserve(g.nodes.size());
  for (const auto& n : g.nodes) labels.push_back(n.class_label);
  return homophily(labels, g.neighbors);
}

double mean_homophily(const std::vector<SceneGraph>& scenes) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& g : scenes) {
    try {
      total += homophily(g);
      ++count;
    } catch (const UndefinedMetricError&) {
    }
  }
  if (count == 0) throw UndefinedMetricError("no scene with a defined homophily");
  return total / static_cast<double>(count);
}

bool heavily_occluded(const SceneGraph& g, std::size_t node) {
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    if (k != node && iou(g.nodes[node].box, g.nodes[k].box) > 0.5) return true;
  }
  return false;
}

}  // namespace hlnet
