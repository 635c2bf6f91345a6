#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hlnet/scene.hpp"

namespace hlnet {

using NodePair = std::pair<std::size_t, std::size_t>;

// Every ordered pair (i, j), i != j, sorted.
std::vector<NodePair> all_pairs(const SceneGraph& g);

// All ground-truth pairs plus up to `ratio` times as many background pairs,
// drawn without replacement. The result is sorted so it does not depend on
// draw order.
std::vector<NodePair> sample_pairs(const SceneGraph& g, int ratio, std::uint64_t seed);

// Predicate target per pair: 0 for background, predicate + 1 otherwise. When a
// pair carries several ground-truth predicates the first listed wins.
std::vector<int> pair_targets(const SceneGraph& g, const std::vector<NodePair>& pairs);

}  // namespace hlnet
