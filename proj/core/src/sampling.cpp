#include "hlnet/sampling.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "hlnet/errors.hpp"

namespace hlnet {

std::vector<NodePair> all_pairs(const SceneGraph& g) {
  std::vector<NodePair> out;
  const std::size_t n = g.nodes.size();
  if (n > 1) out.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<NodePair> sample_pairs(const SceneGraph& g, int ratio, std::uint64_t seed) {
  if (ratio < 0) throw ConfigError("background sampling ratio must be >= 0");
  std::set<NodePair> gt;
  for (const auto& t : g.gt_triplets) gt.emplace(t.subject, t.object);
  std::vector<NodePair> background;
  for (const auto& p : all_pairs(g)) {
    if (!gt.contains(p)) background.push_back(p);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(background.begin(), background.end(), rng);
  const std::size_t take = std::min(background.size(), gt.size() * static_cast<std::size_t>(ratio));
  std::vector<NodePair> out(gt.begin(), gt.end());
  out.insert(out.end(), background.begin(), background.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> pair_targets(const SceneGraph& g, const std::vector<NodePair>& pairs) {
  std::map<NodePair, int> label;
  for (const auto& t : g.gt_triplets) label.try_emplace({t.subject, t.object}, t.predicate + 1);
  std::vector<int> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto it = label.find(p);
    out.push_back(it == label.end() ? 0 : it->second);
  }
  return out;
}

}  // namespace hlnet
