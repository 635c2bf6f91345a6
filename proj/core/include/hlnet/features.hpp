#pragma once

#include <span>
#include <string>
#include <vector>

#include "hlnet/diff_array.hpp"
#include "hlnet/nn.hpp"
#include "hlnet/scene.hpp"

namespace hlnet {

// Appearance of the union region of 2 or 3 nodes: area-weighted mean of the
// members' appearances plus noise seeded by the scene key and the id set, so
// the result does not depend on id order. Duplicate or invalid ids throw
// ContractError.
std::vector<double> union_appearance(const SceneGraph& g, std::span<const std::size_t> ids);

// Width of the raw per-node input: appearance, detector probabilities and the
// box normalized by the canvas (x1, y1, x2, y2).
std::size_t node_feature_width(std::size_t appearance_dim, std::size_t num_classes);

// Raw per-node inputs stacked as (n, node_feature_width).
DiffArray node_features(const SceneGraph& g);

// x_i = W [appearance, detector_probs, box / canvas] + b.
DiffArray node_input(const DiffArray& features, const Linear& projection);

}  // namespace hlnet
