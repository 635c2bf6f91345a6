#include "hlnet/generator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "hlnet/errors.hpp"
#include "hlnet/format.hpp"

namespace hlnet {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

// Predicate for a subject that sits below its object, shared by all class pairs.
constexpr int kBelowPredicate = 0;

std::uint64_t scene_key(const GenConfig& cfg, Split split, std::size_t index) {
  return mix_seed(mix_seed(cfg.seed * 3 + static_cast<std::uint64_t>(split)) + index);
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

// Per-config lookup tables shared by every scene.
struct WorldTables {
  std::vector<int> group_of;  // class -> context group
  // relation_base[cs * C + co] = predicate when the subject sits above the
  // object, relation_alt otherwise; -1 when the class pair carries no relation.
  // The alternative is the shared "below" predicate for every class pair.
  std::vector<int> relation_base;
  std::vector<int> relation_alt;
};

WorldTables make_tables(const GenConfig& cfg) {
  const int c = cfg.num_object_classes;
  WorldTables t;
  t.group_of.resize(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k) t.group_of[static_cast<std::size_t>(k)] = k * cfg.context_groups / c;
  std::mt19937_64 rng(mix_seed(cfg.seed ^ 0x7AB1E5ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pred(0, cfg.num_predicates - 1);
  t.relation_base.assign(static_cast<std::size_t>(c * c), -1);
  t.relation_alt.assign(static_cast<std::size_t>(c * c), -1);
  for (int k = 0; k < c * c; ++k) {
    const bool bearing = unit(rng) < cfg.relation_density;
    const int a = pred(rng);
    if (bearing) {
      t.relation_base[static_cast<std::size_t>(k)] = a;
      t.relation_alt[static_cast<std::size_t>(k)] = kBelowPredicate;
    }
  }
  return t;
}

std::vector<int> sample_classes(const GenConfig& cfg, const WorldTables& tables, int n, std::mt19937_64& rng) {
  const int c = cfg.num_object_classes;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int group = std::uniform_int_distribution<int>(0, cfg.context_groups - 1)(rng);
  const double target_pairs = cfg.homophily * n * (n - 1) / 2.0;
  const double floor_pairs = std::floor(target_pairs);
  const long target = static_cast<long>(floor_pairs) + (unit(rng) < target_pairs - floor_pairs ? 1 : 0);

  auto weight = [&](int k) { return tables.group_of[static_cast<std::size_t>(k)] == group ? 1.0 : cfg.off_group_weight; };
  auto pick_weighted = [&](const std::vector<int>& options) {
    double total = 0.0;
    for (int k : options) total += weight(k);
    double r = unit(rng) * total;
    for (int k : options) {
      r -= weight(k);
      if (r <= 0.0) return k;
    }
    return options.back();
  };

  // Class multiplicities m_k give sum_k m_k (m_k - 1) / 2 same-class pairs.
  // Choose, among partitions of n into at most C parts, one whose pair count
  // is closest to the target.
  std::vector<std::vector<int>> best;
  long best_gap = -1;
  std::vector<int> parts;
  std::function<void(int, int, long)> walk = [&](int remaining, int max_part, long pairs) {
    if (remaining == 0) {
      const long gap = std::labs(pairs - target);
      if (best_gap < 0 || gap < best_gap) {
        best_gap = gap;
        best.clear();
      }
      if (gap == best_gap) best.push_back(parts);
      return;
    }
    if (static_cast<int>(parts.size()) == c) return;
    for (int m = std::min(remaining, max_part); m >= 1; --m) {
      parts.push_back(m);
      walk(remaining - m, m, pairs + static_cast<long>(m) * (m - 1) / 2);
      parts.pop_back();
    }
  };
  walk(n, n, 0);
  const auto& chosen = best[std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng)];

  std::vector<int> pool(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k) pool[static_cast<std::size_t>(k)] = k;
  std::vector<int> labels;
  for (int m : chosen) {
    const int k = pick_weighted(pool);
    pool.erase(std::find(pool.begin(), pool.end(), k));
    labels.insert(labels.end(), static_cast<std::size_t>(m), k);
  }
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

Box random_box(const GenConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> size(0.12, 0.32);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double w = size(rng) * cfg.canvas_w;
  const double h = size(rng) * cfg.canvas_h;
  const double x = unit(rng) * (cfg.canvas_w - w);
  const double y = unit(rng) * (cfg.canvas_h - h);
  return {round6(x), round6(y), round6(x + w), round6(y + h)};
}

Box occluding_box(const GenConfig& cfg, const Box& target, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> shift(-0.15, 0.15);
  std::uniform_real_distribution<double> stretch(0.9, 1.1);
  const double w = std::min(target.width() * stretch(rng), cfg.canvas_w);
  const double h = std::min(target.height() * stretch(rng), cfg.canvas_h);
  double x = target.x1 + shift(rng) * target.width();
  double y = target.y1 + shift(rng) * target.height();
  x = std::clamp(x, 0.0, cfg.canvas_w - w);
  y = std::clamp(y, 0.0, cfg.canvas_h - h);
  return {round6(x), round6(y), round6(x + w), round6(y + h)};
}

std::vector<Box> place_boxes(const GenConfig& cfg, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Box> boxes;
  std::vector<bool> covered;
  // Each occluding placement marks two nodes, and only n - 1 placements can
  // occlude; this keeps the expected share of occluded nodes near the rate.
  const double occlusion_prob = std::min(1.0, cfg.occlusion_rate * n / (2.0 * (n - 1)));
  for (int k = 0; k < n; ++k) {
    bool placed = false;
    if (k > 0 && unit(rng) < occlusion_prob) {
      std::vector<std::size_t> open;
      for (std::size_t j = 0; j < boxes.size(); ++j) {
        if (!covered[j]) open.push_back(j);
      }
      if (!open.empty()) {
        const std::size_t target = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
        for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
          Box b = occluding_box(cfg, boxes[target], rng);
          if (b.valid() && iou(b, boxes[target]) > 0.5) {
            boxes.push_back(b);
            covered[target] = true;
            covered.push_back(true);
            placed = true;
          }
        }
      }
    }
    if (placed) continue;
    Box best{};
    double best_overlap = 2.0;
    for (int attempt = 0; attempt < 50; ++attempt) {
      Box b = random_box(cfg, rng);
      double overlap = 0.0;
      for (const auto& o : boxes) overlap = std::max(overlap, iou(b, o));
      if (overlap < best_overlap) {
        best_overlap = overlap;
        best = b;
      }
      if (overlap <= 0.3) break;
    }
    boxes.push_back(best);
    covered.push_back(false);
  }
  return boxes;
}

std::vector<Triplet> assign_relations(const GenConfig& cfg, const WorldTables& tables,
                                      const std::vector<int>& labels, const std::vector<Box>& boxes,
                                      std::mt19937_64& rng) {
  const int c = cfg.num_object_classes;
  const std::size_t n = labels.size();
  std::vector<std::pair<std::size_t, std::size_t>> bearing;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && tables.relation_base[static_cast<std::size_t>(labels[i] * c + labels[j])] >= 0) {
        bearing.emplace_back(i, j);
      }
    }
  }
  std::shuffle(bearing.begin(), bearing.end(), rng);
  if (bearing.size() > static_cast<std::size_t>(cfg.max_relations)) bearing.resize(static_cast<std::size_t>(cfg.max_relations));
  const bool forced = bearing.empty();
  if (forced) {
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
    if (j >= i) ++j;
    bearing.emplace_back(i, j);
  }

  auto distance = [&](std::size_t i, std::size_t j) {
    return std::hypot(boxes[i].center_x() - boxes[j].center_x(), boxes[i].center_y() - boxes[j].center_y());
  };
  // Closer objects claim their predicate first; a subject never reuses a
  // predicate, so later relations shift to the next free one.
  std::sort(bearing.begin(), bearing.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return distance(a.first, a.second) < distance(b.first, b.second);
  });

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_pred(0, cfg.num_predicates - 1);
  std::vector<Triplet> out;
  std::set<std::pair<std::size_t, int>> used;
  for (auto [i, j] : bearing) {
    const auto key = static_cast<std::size_t>(labels[i] * c + labels[j]);
    int pred;
    if (forced) {
      pred = any_pred(rng);
    } else {
      pred = boxes[i].center_y() < boxes[j].center_y() ? tables.relation_base[key] : tables.relation_alt[key];
    }
    for (int tries = 0; tries < cfg.num_predicates && used.contains({i, pred}); ++tries) {
      pred = (pred + 1) % cfg.num_predicates;
    }
    used.insert({i, pred});
    if (unit(rng) < cfg.predicate_noise) pred = any_pred(rng);
    out.push_back({i, j, pred});
  }
  std::sort(out.begin(), out.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.subject, a.object) < std::tie(b.subject, b.object);
  });
  return out;
}

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t n, double stddev) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = stddev * normal(rng);
  return v;
}

}  // namespace

void GenConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (num_object_classes < 1) fail("num_object_classes must be >= 1");
  if (num_predicates < 1) fail("num_predicates must be >= 1");
  if (appearance_dim < 1) fail("appearance_dim must be >= 1");
  if (train_scenes < 0 || val_scenes < 0 || test_scenes < 0) fail("scene counts must be >= 0");
  if (min_nodes < 2 || max_nodes < min_nodes || max_nodes > 24) {
    fail("node range must satisfy 2 <= min_nodes <= max_nodes <= 24");
  }
  if (!(homophily >= 0.0 && homophily <= 1.0)) fail("homophily must lie in [0, 1]");
  if (!(mix_weight >= 0.0 && mix_weight <= 1.0)) fail("mix_weight must lie in [0, 1]");
  if (!(occlusion_rate >= 0.0 && occlusion_rate <= 1.0)) fail("occlusion_rate must lie in [0, 1]");
  if (!(predicate_noise >= 0.0 && predicate_noise <= 1.0)) fail("predicate_noise must lie in [0, 1]");
  if (!(relation_density >= 0.0 && relation_density <= 1.0)) fail("relation_density must lie in [0, 1]");
  if (noise < 0.0 || union_noise < 0.0 || detector_noise < 0.0) fail("noise scales must be >= 0");
  if (max_relations < 1) fail("max_relations must be >= 1");
  if (context_groups < 1 || context_groups > num_object_classes) fail("context_groups must lie in [1, num_object_classes]");
  if (!(canvas_w > 0.0 && canvas_h > 0.0)) fail("canvas must be positive");
  const double reachable = min_reachable_homophily(*this);
  if (homophily < reachable - 0.05) {
    fail("homophily " + format_double(homophily) + " is infeasible with " + std::to_string(num_object_classes) +
         " classes; minimum reachable is " + format_double(reachable));
  }
}

double min_reachable_homophily(const GenConfig& cfg) {
  double total = 0.0;
  int count = 0;
  const long c = cfg.num_object_classes;
  for (long n = cfg.min_nodes; n <= cfg.max_nodes; ++n) {
    const long q = n / c, r = n % c;
    const long pairs = r * (q + 1) * q / 2 + (c - r) * q * (q - 1) / 2;
    total += 2.0 * static_cast<double>(pairs) / static_cast<double>(n * (n - 1));
    ++count;
  }
  return count ? total / count : 0.0;
}

std::vector<std::vector<double>> class_prototypes(const GenConfig& cfg) {
  std::mt19937_64 rng(mix_seed(cfg.seed ^ 0x9807u));
  std::vector<std::vector<double>> protos;
  for (int k = 0; k < cfg.num_object_classes; ++k) {
    auto v = gaussian_vector(rng, static_cast<std::size_t>(cfg.appearance_dim), 1.0);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    protos.push_back(std::move(v));
  }
  return protos;
}

void synthesize_features(SceneGraph& g, const GenConfig& cfg, Split split, std::size_t index) {
  const auto protos = class_prototypes(cfg);
  const auto d = static_cast<std::size_t>(cfg.appearance_dim);
  const std::uint64_t key = scene_key(cfg, split, index);
  g.feature_key = key;
  g.union_noise = cfg.union_noise;
  g.connect_all();

  const std::size_t n = g.nodes.size();
  std::vector<std::vector<double>> base(n);
  std::vector<std::mt19937_64> node_rng;
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = g.nodes[i];
    if (node.class_label < 0 || node.class_label >= cfg.num_object_classes) {
      throw ConfigError("node class " + std::to_string(node.class_label) + " outside the configured classes");
    }
    node_rng.emplace_back(mix_seed(key ^ mix_seed((i + 1) * 0x100000001B3ULL + static_cast<std::uint64_t>(node.class_label))));
    base[i] = gaussian_vector(node_rng.back(), d, cfg.noise / std::sqrt(static_cast<double>(d)));
    for (std::size_t k = 0; k < d; ++k) base[i][k] += protos[static_cast<std::size_t>(node.class_label)][k];
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> mixed = base[i];
    std::size_t occluders = 0;
    std::vector<double> acc(d, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || iou(g.nodes[i].box, g.nodes[j].box) <= 0.5) continue;
      ++occluders;
      for (std::size_t k = 0; k < d; ++k) acc[k] += base[j][k];
    }
    if (occluders) {
      for (std::size_t k = 0; k < d; ++k) {
        mixed[k] = (1.0 - cfg.mix_weight) * base[i][k] + cfg.mix_weight * acc[k] / static_cast<double>(occluders);
      }
    }
    g.nodes[i].appearance = std::move(mixed);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = g.nodes[i];
    std::vector<double> logits(static_cast<std::size_t>(cfg.num_object_classes));
    for (std::size_t c = 0; c < logits.size(); ++c) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += node.appearance[k] * protos[c][k];
      logits[c] = cfg.detector_temperature * dot + cfg.detector_noise * normal(node_rng[i]);
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (auto& l : logits) z += (l = std::exp(l - mx));
    for (auto& l : logits) l /= z;
    node.detector_probs = std::move(logits);
  }
}

Corpus generate_corpus(const GenConfig& cfg) {
  cfg.validate();
  const WorldTables tables = make_tables(cfg);
  Corpus corpus;
  auto make_split = [&](Split split, int count, std::vector<SceneGraph>& out) {
    for (int s = 0; s < count; ++s) {
      const auto index = static_cast<std::size_t>(s);
      std::mt19937_64 rng(mix_seed(scene_key(cfg, split, index) ^ 0x5CE7E5ULL));
      const int n = std::uniform_int_distribution<int>(cfg.min_nodes, cfg.max_nodes)(rng);
      const auto labels = sample_classes(cfg, tables, n, rng);
      const auto boxes = place_boxes(cfg, n, rng);
      SceneGraph g;
      g.canvas_w = cfg.canvas_w;
      g.canvas_h = cfg.canvas_h;
      for (int i = 0; i < n; ++i) {
        ObjectNode node;
        node.id = static_cast<std::size_t>(i);
        node.box = boxes[static_cast<std::size_t>(i)];
        node.class_label = labels[static_cast<std::size_t>(i)];
        g.nodes.push_back(std::move(node));
      }
      g.gt_triplets = assign_relations(cfg, tables, labels, boxes, rng);
      synthesize_features(g, cfg, split, index);
      out.push_back(std::move(g));
    }
  };
  make_split(Split::Train, cfg.train_scenes, corpus.train);
  make_split(Split::Val, cfg.val_scenes, corpus.val);
  make_split(Split::Test, cfg.test_scenes, corpus.test);
  return corpus;
}

std::map<std::string, std::string> GenConfig::to_key_values() const {
  return {
      {"num_object_classes", std::to_string(num_object_classes)},
      {"num_predicates", std::to_string(num_predicates)},
      {"appearance_dim", std::to_string(appearance_dim)},
      {"train_scenes", std::to_string(train_scenes)},
      {"val_scenes", std::to_string(val_scenes)},
      {"test_scenes", std::to_string(test_scenes)},
      {"min_nodes", std::to_string(min_nodes)},
      {"max_nodes", std::to_string(max_nodes)},
      {"homophily", format_double(homophily)},
      {"occlusion_rate", format_double(occlusion_rate)},
      {"mix_weight", format_double(mix_weight)},
      {"noise", format_double(noise)},
      {"union_noise", format_double(union_noise)},
      {"detector_temperature", format_double(detector_temperature)},
      {"detector_noise", format_double(detector_noise)},
      {"predicate_noise", format_double(predicate_noise)},
      {"relation_density", format_double(relation_density)},
      {"max_relations", std::to_string(max_relations)},
      {"context_groups", std::to_string(context_groups)},
      {"off_group_weight", format_double(off_group_weight)},
      {"canvas_w", format_double(canvas_w)},
      {"canvas_h", format_double(canvas_h)},
      {"seed", std::to_string(seed)},
  };
}

GenConfig GenConfig::from_key_values(const std::map<std::string, std::string>& kv) {
  GenConfig cfg;
  const std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"num_object_classes", [&](const std::string& v) { cfg.num_object_classes = parse_int(v); }},
      {"num_predicates", [&](const std::string& v) { cfg.num_predicates = parse_int(v); }},
      {"appearance_dim", [&](const std::string& v) { cfg.appearance_dim = parse_int(v); }},
      {"train_scenes", [&](const std::string& v) { cfg.train_scenes = parse_int(v); }},
      {"val_scenes", [&](const std::string& v) { cfg.val_scenes = parse_int(v); }},
      {"test_scenes", [&](const std::string& v) { cfg.test_scenes = parse_int(v); }},
      {"min_nodes", [&](const std::string& v) { cfg.min_nodes = parse_int(v); }},
      {"max_nodes", [&](const std::string& v) { cfg.max_nodes = parse_int(v); }},
      {"homophily", [&](const std::string& v) { cfg.homophily = parse_double(v); }},
      {"occlusion_rate", [&](const std::string& v) { cfg.occlusion_rate = parse_double(v); }},
      {"mix_weight", [&](const std::string& v) { cfg.mix_weight = parse_double(v); }},
      {"noise", [&](const std::string& v) { cfg.noise = parse_double(v); }},
      {"union_noise", [&](const std::string& v) { cfg.union_noise = parse_double(v); }},
      {"detector_temperature", [&](const std::string& v) { cfg.detector_temperature = parse_double(v); }},
      {"detector_noise", [&](const std::string& v) { cfg.detector_noise = parse_double(v); }},
      {"predicate_noise", [&](const std::string& v) { cfg.predicate_noise = parse_double(v); }},
      {"relation_density", [&](const std::string& v) { cfg.relation_density = parse_double(v); }},
      {"max_relations", [&](const std::string& v) { cfg.max_relations = parse_int(v); }},
      {"context_groups", [&](const std::string& v) { cfg.context_groups = parse_int(v); }},
      {"off_group_weight", [&](const std::string& v) { cfg.off_group_weight = parse_double(v); }},
      {"canvas_w", [&](const std::string& v) { cfg.canvas_w = parse_double(v); }},
      {"canvas_h", [&](const std::string& v) { cfg.canvas_h = parse_double(v); }},
      {"seed", [&](const std::string& v) { cfg.seed = parse_uint64(v); }},
  };
  for (const auto& [k, v] : kv) {
    auto it = setters.find(k);
    if (it == setters.end()) throw ConfigError("unknown generator key '" + k + "'");
    it->second(v);
  }
  return cfg;
}

}  // namespace hlnet
