#include "hlnet/freq_bias.hpp"

#include <cmath>
#include <string>

#include "hlnet/errors.hpp"

namespace hlnet {

FrequencyBias::FrequencyBias(int num_object_classes, int num_predicates)
    : num_obj_(num_object_classes), num_rel_(num_predicates) {
  if (num_object_classes < 1 || num_predicates < 1) throw ConfigError("frequency bias needs >= 1 class and predicate");
  const auto pairs = static_cast<std::size_t>(num_obj_ * num_obj_);
  table_.assign(pairs * static_cast<std::size_t>(num_rel_), 0.0);
  seen_.assign(pairs, 0);
}

std::size_t FrequencyBias::offset(int s, int o) const {
  if (s < 0 || o < 0 || s >= num_obj_ || o >= num_obj_) {
    throw ContractError("frequency bias lookup with class pair (" + std::to_string(s) + ", " + std::to_string(o) + ")");
  }
  return static_cast<std::size_t>(s * num_obj_ + o);
}

std::span<const double> FrequencyBias::row(int s, int o) const {
  return std::span<const double>(table_).subspan(offset(s, o) * static_cast<std::size_t>(num_rel_),
                                                 static_cast<std::size_t>(num_rel_));
}

std::span<double> FrequencyBias::mutable_row(int s, int o) {
  return std::span<double>(table_).subspan(offset(s, o) * static_cast<std::size_t>(num_rel_),
                                           static_cast<std::size_t>(num_rel_));
}

bool FrequencyBias::seen(int s, int o) const { return seen_[offset(s, o)] != 0; }

void FrequencyBias::mark_seen(int s, int o) { seen_[offset(s, o)] = 1; }

std::vector<double> FrequencyBias::logits_with_background(int s, int o) const {
  std::vector<double> out(static_cast<std::size_t>(num_rel_) + 1, 0.0);
  const auto r = row(s, o);
  std::copy(r.begin(), r.end(), out.begin() + 1);
  return out;
}

FrequencyBias build_frequency_bias(const std::vector<SceneGraph>& train, int num_object_classes, int num_predicates) {
  FrequencyBias bias(num_object_classes, num_predicates);
  std::vector<double> counts(bias.table().size(), 0.0);
  for (const auto& g : train) {
    for (const auto& t : g.gt_triplets) {
      if (t.predicate < 0 || t.predicate >= num_predicates) {
        throw ContractError("predicate " + std::to_string(t.predicate) + " outside [0, " +
                            std::to_string(num_predicates) + ")");
      }
      const int s = g.nodes[t.subject].class_label;
      const int o = g.nodes[t.object].class_label;
      bias.mark_seen(s, o);
      counts[static_cast<std::size_t>((s * num_object_classes + o) * num_predicates + t.predicate)] += 1.0;
    }
  }
  for (int s = 0; s < num_object_classes; ++s) {
    for (int o = 0; o < num_object_classes; ++o) {
      if (!bias.seen(s, o)) continue;
      const double* c = counts.data() + (s * num_object_classes + o) * num_predicates;
      double total = 0.0;
      for (int r = 0; r < num_predicates; ++r) total += c[r] + 1.0;
      auto row = bias.mutable_row(s, o);
      for (int r = 0; r < num_predicates; ++r) row[static_cast<std::size_t>(r)] = std::log((c[r] + 1.0) / total);
    }
  }
  return bias;
}

}  // namespace hlnet
