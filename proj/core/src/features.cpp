#include "hlnet/features.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hlnet/errors.hpp"
#include "hlnet/generator.hpp"

namespace hlnet {

std::vector<double> union_appearance(const SceneGraph& g, std::span<const std::size_t> ids) {
  if (ids.size() < 2 || ids.size() > 3) throw ContractError("union_appearance takes 2 or 3 node ids");
  std::vector<std::size_t> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ContractError("union_appearance: duplicate node id");
  }
  if (sorted.back() >= g.nodes.size()) throw ContractError("union_appearance: node id out of range");

  const std::size_t d = g.nodes[sorted.front()].appearance.size();
  std::vector<double> out(d, 0.0);
  double total_area = 0.0;
  for (auto id : sorted) {
    const auto& node = g.nodes[id];
    if (node.appearance.size() != d) throw DimensionError("union_appearance: appearance lengths differ");
    const double w = node.box.area();
    total_area += w;
    for (std::size_t k = 0; k < d; ++k) out[k] += w * node.appearance[k];
  }
  for (auto& v : out) v /= total_area;

  std::uint64_t key = g.feature_key;
  for (auto id : sorted) key = mix_seed(key ^ (id + 0x51ED27ULL));
  std::mt19937_64 rng(key);
  std::normal_distribution<double> normal(0.0, g.union_noise / std::sqrt(static_cast<double>(d)));
  for (auto& v : out) v += normal(rng);
  return out;
}

std::size_t node_feature_width(std::size_t appearance_dim, std::size_t num_classes) {
  return appearance_dim + num_classes + 4;
}

DiffArray node_features(const SceneGraph& g) {
  if (g.nodes.empty()) throw ContractError("node_features: scene has no nodes");
  const std::size_t d_app = g.nodes.front().appearance.size();
  const std::size_t c = g.nodes.front().detector_probs.size();
  const std::size_t width = node_feature_width(d_app, c);
  std::vector<double> values;
  values.reserve(g.nodes.size() * width);
  for (const auto& n : g.nodes) {
    if (n.appearance.size() != d_app || n.detector_probs.size() != c) {
      throw DimensionError("node_features: node " + std::to_string(n.id) + " has inconsistent feature lengths");
    }
    values.insert(values.end(), n.appearance.begin(), n.appearance.end());
    values.insert(values.end(), n.detector_probs.begin(), n.detector_probs.end());
    values.push_back(n.box.x1 / g.canvas_w);
    values.push_back(n.box.y1 / g.canvas_h);
    values.push_back(n.box.x2 / g.canvas_w);
    values.push_back(n.box.y2 / g.canvas_h);
  }
  return DiffArray::constant({g.nodes.size(), width}, std::move(values));
}

DiffArray node_input(const DiffArray& features, const Linear& projection) { return linear(projection, features); }

}  // namespace hlnet
