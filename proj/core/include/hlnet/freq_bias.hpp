#pragma once

#include <span>
#include <vector>

#include "hlnet/scene.hpp"

namespace hlnet {

// Log empirical predicate distribution per (subject class, object class) pair,
// Laplace-smoothed with +1. Pairs never seen in training keep a zero row.
class FrequencyBias {
 public:
  FrequencyBias() = default;
  FrequencyBias(int num_object_classes, int num_predicates);

  int num_object_classes() const { return num_obj_; }
  int num_predicates() const { return num_rel_; }

  std::span<const double> row(int subject_class, int object_class) const;
  std::span<double> mutable_row(int subject_class, int object_class);
  bool seen(int subject_class, int object_class) const;
  void mark_seen(int subject_class, int object_class);

  // Row with a leading zero for the background logit (length C_rel + 1).
  std::vector<double> logits_with_background(int subject_class, int object_class) const;

  const std::vector<double>& table() const { return table_; }

  friend bool operator==(const FrequencyBias&, const FrequencyBias&) = default;

 private:
  std::size_t offset(int s, int o) const;

  int num_obj_ = 0;
  int num_rel_ = 0;
  std::vector<double> table_;
  std::vector<char> seen_;
};

FrequencyBias build_frequency_bias(const std::vector<SceneGraph>& train, int num_object_classes, int num_predicates);

}  // namespace hlnet
