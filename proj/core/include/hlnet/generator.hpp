#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hlnet/scene.hpp"

namespace hlnet {

// Synthetic scene-graph corpus parameters.
struct GenConfig {
  int num_object_classes = 10;
  int num_predicates = 6;
  int appearance_dim = 32;
  int train_scenes = 500;
  int val_scenes = 50;
  int test_scenes = 100;
  int min_nodes = 4;
  int max_nodes = 8;
  double homophily = 0.2;         // target h*, corpus average
  double occlusion_rate = 0.3;    // chance a placed node is put on top of an earlier one
  double mix_weight = 0.5;        // lambda_mix for occluded appearances
  double noise = 2.0;             // norm of the appearance noise vector (in expectation)
  double union_noise = 0.1;
  double detector_temperature = 3.0;
  double detector_noise = 0.5;
  double predicate_noise = 0.1;   // chance a relation gets a uniformly random predicate
  double relation_density = 0.5;  // share of ordered class pairs that carry a relation
  int max_relations = 6;
  int context_groups = 2;         // classes split into groups; a scene draws mostly from one
  double off_group_weight = 0.15;
  double canvas_w = 100.0;
  double canvas_h = 100.0;
  std::uint64_t seed = 0;

  // Throws ConfigError on out-of-range values or an unreachable homophily.
  void validate() const;

  std::map<std::string, std::string> to_key_values() const;
  // Unknown keys throw ConfigError.
  static GenConfig from_key_values(const std::map<std::string, std::string>& kv);
};

enum class Split { Train = 0, Val = 1, Test = 2 };

// Deterministic in cfg: same config, same corpus, bit for bit.
Corpus generate_corpus(const GenConfig& cfg);

// Recomputes appearance, detector probabilities, neighbor sets and the union
// noise key of a scene from its boxes and classes. The corpus files only store
// geometry and labels; this restores the rest.
void synthesize_features(SceneGraph& g, const GenConfig& cfg, Split split, std::size_t index);

// Fixed unit-norm class prototypes for a config.
std::vector<std::vector<double>> class_prototypes(const GenConfig& cfg);

// Smallest corpus-average homophily reachable with the configured class count
// and node-count range.
double min_reachable_homophily(const GenConfig& cfg);

// splitmix64 step; used to derive independent per-scene seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace hlnet
