#pragma once

// Hand-rolled random instance generators for property tests. Every generator
// is a pure function of the Rng state so a failing case can be replayed from
// its seed.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "hlnet/diff_array.hpp"
#include "hlnet/generator.hpp"
#include "hlnet/model.hpp"
#include "hlnet/sampling.hpp"
#include "hlnet/scene.hpp"

namespace hlnet_test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double stddev = 1.0) { return std::normal_distribution<double>(0.0, stddev)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool coin(double p = 0.5) { return uniform() < p; }
  std::mt19937_64& engine() { return engine_; }

  std::vector<double> vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

inline hlnet::DiffArray random_leaf(Rng& rng, hlnet::Shape shape, double lo = -1.0, double hi = 1.0) {
  const std::size_t n = hlnet::shape_size(shape);
  return hlnet::DiffArray::leaf(std::move(shape), rng.vector(n, lo, hi), true);
}

inline hlnet::DiffArray random_constant(Rng& rng, hlnet::Shape shape, double lo = -1.0, double hi = 1.0) {
  const std::size_t n = hlnet::shape_size(shape);
  return hlnet::DiffArray::constant(std::move(shape), rng.vector(n, lo, hi));
}

inline hlnet::Box random_box(Rng& rng, double canvas = 100.0) {
  const double w = rng.uniform(5.0, canvas / 2);
  const double h = rng.uniform(5.0, canvas / 2);
  const double x = rng.uniform(0.0, canvas - w);
  const double y = rng.uniform(0.0, canvas - h);
  return {x, y, x + w, y + h};
}

// Small generator config for model-level tests.
inline hlnet::GenConfig tiny_gen_config(int classes = 3, int predicates = 2, int appearance_dim = 4) {
  hlnet::GenConfig cfg;
  cfg.num_object_classes = classes;
  cfg.num_predicates = predicates;
  cfg.appearance_dim = appearance_dim;
  cfg.train_scenes = 6;
  cfg.val_scenes = 2;
  cfg.test_scenes = 2;
  cfg.min_nodes = 3;
  cfg.max_nodes = 4;
  cfg.homophily = 0.4;
  cfg.context_groups = 1;
  return cfg;
}

inline hlnet::ModelConfig tiny_model_config(const hlnet::GenConfig& gen) {
  hlnet::ModelConfig m;
  m.num_object_classes = gen.num_object_classes;
  m.num_predicates = gen.num_predicates;
  m.appearance_dim = gen.appearance_dim;
  m.width = 4;
  m.ffn_hidden = 8;
  m.layers = 2;
  m.steps = 2;
  return m;
}

// Scene with the given boxes and classes; features synthesized from `gen`.
// Relations are listed explicitly as (subject, object, predicate).
inline hlnet::SceneGraph make_scene(const std::vector<hlnet::Box>& boxes, const std::vector<int>& classes,
                                    const std::vector<hlnet::Triplet>& relations, const hlnet::GenConfig& gen,
                                    std::size_t key = 0) {
  hlnet::SceneGraph g;
  g.canvas_w = gen.canvas_w;
  g.canvas_h = gen.canvas_h;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    hlnet::ObjectNode n;
    n.id = i;
    n.box = boxes[i];
    n.class_label = classes[i];
    g.nodes.push_back(n);
  }
  g.gt_triplets = relations;
  hlnet::synthesize_features(g, gen, hlnet::Split::Train, key);
  return g;
}

// Random scene with n nodes, random classes and a random relation set.
inline hlnet::SceneGraph random_scene(Rng& rng, std::size_t n, const hlnet::GenConfig& gen,
                                      double relation_prob = 0.4) {
  std::vector<hlnet::Box> boxes;
  std::vector<int> classes;
  for (std::size_t i = 0; i < n; ++i) {
    boxes.push_back(random_box(rng, gen.canvas_w));
    classes.push_back(rng.integer(0, gen.num_object_classes - 1));
  }
  std::vector<hlnet::Triplet> rels;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && rng.coin(relation_prob)) rels.push_back({i, j, rng.integer(0, gen.num_predicates - 1)});
    }
  }
  return make_scene(boxes, classes, rels, gen, static_cast<std::size_t>(rng.integer(0, 1 << 20)));
}

// Non-overlapping boxes on a grid so no node is occluded and every box match
// is unambiguous.
inline std::vector<hlnet::Box> grid_boxes(std::size_t n, double canvas = 100.0) {
  std::vector<hlnet::Box> boxes;
  const double cell = canvas / 4.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i % 4) * cell;
    const double y = static_cast<double>(i / 4) * cell;
    boxes.push_back({x + 1.0, y + 1.0, x + cell - 1.0, y + cell - 1.0});
  }
  return boxes;
}

// Neighbor lists of the complete graph.
inline std::vector<std::vector<std::size_t>> complete(std::size_t n) {
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) nb[i].push_back(j);
    }
  }
  return nb;
}

// All ordered pairs (i, j), i != j.
inline std::vector<hlnet::NodePair> every_pair(std::size_t n) {
  std::vector<hlnet::NodePair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

inline std::vector<std::vector<std::size_t>> random_neighbors(Rng& rng, std::size_t n, double p = 0.6) {
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && rng.coin(p)) nb[i].push_back(j);
    }
  }
  return nb;
}

// Random subset of the ordered pairs, never empty.
inline std::vector<hlnet::NodePair> random_pairs(Rng& rng, std::size_t n, double p = 0.7) {
  std::vector<hlnet::NodePair> pairs;
  for (const auto& pr : every_pair(n)) {
    if (rng.coin(p)) pairs.push_back(pr);
  }
  if (pairs.empty()) pairs.emplace_back(0, 1);
  return pairs;
}

}  // namespace hlnet_test
