#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hlnet {

struct Box {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
  bool valid() const { return x1 < x2 && y1 < y2; }
  bool contains_point(double x, double y) const { return x >= x1 && x <= x2 && y >= y1 && y <= y2; }

  friend bool operator==(const Box&, const Box&) = default;
};

// Intersection over union; 0 for disjoint interiors, 1 iff equal.
double iou(const Box& a, const Box& b);
Box union_box(const Box& a, const Box& b);

inline constexpr int kBackground = -1;

struct ObjectNode {
  std::size_t id = 0;
  Box box;
  int class_label = 0;
  std::vector<double> appearance;
  std::vector<double> detector_probs;

  friend bool operator==(const ObjectNode&, const ObjectNode&) = default;
};

struct Triplet {
  std::size_t subject = 0;
  std::size_t object = 0;
  int predicate = 0;  // [0, C_rel) or kBackground

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct SceneGraph {
  double canvas_w = 0.0;
  double canvas_h = 0.0;
  std::vector<ObjectNode> nodes;
  std::vector<Triplet> gt_triplets;
  // neighbors[i] is N_i; never contains i.
  std::vector<std::vector<std::size_t>> neighbors;
  // Seeds the union-appearance noise; regenerated with the other features.
  std::uint64_t feature_key = 0;
  double union_noise = 0.0;

  std::size_t size() const { return nodes.size(); }
  // Sets N_i to every other node.
  void connect_all();
  // Throws ContractError on broken invariants.
  void validate() const;

  friend bool operator==(const SceneGraph&, const SceneGraph&) = default;
};

struct Corpus {
  std::vector<SceneGraph> train;
  std::vector<SceneGraph> val;
  std::vector<SceneGraph> test;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Node-averaged fraction of same-class neighbors; nodes with empty N_i are
// skipped. Throws UndefinedMetricError when no node has a neighbor.
double homophily(const SceneGraph& g);
// Same metric over an explicit labeling and neighbor lists.
double homophily(const std::vector<int>& labels, const std::vector<std::vector<std::size_t>>& neighbors);
// Mean of per-scene homophily over scenes where it is defined.
double mean_homophily(const std::vector<SceneGraph>& scenes);

// True when the node's box has IoU > 0.5 with any other node in the scene.
bool heavily_occluded(const SceneGraph& g, std::size_t node);

}  // namespace hlnet
