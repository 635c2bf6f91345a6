#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <vector>

#include "hlnet/corpus_io.hpp"
#include "hlnet/errors.hpp"
#include "hlnet/features.hpp"
#include "hlnet/freq_bias.hpp"
#include "hlnet/generator.hpp"
#include "hlnet/gradcheck.hpp"
#include "hlnet/io.hpp"
#include "hlnet/ops.hpp"
#include "hlnet/sampling.hpp"
#include "hlnet/scene.hpp"
#include "hlnet/spatial.hpp"
#include "hlnet_test/generators.hpp"

using namespace hlnet;
using hlnet_test::Rng;

namespace {

SceneGraph labeled_graph(const std::vector<int>& classes, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  SceneGraph g;
  g.canvas_w = g.canvas_h = 100.0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    ObjectNode n;
    n.id = i;
    n.box = {1.0, 1.0, 2.0, 2.0};
    n.class_label = classes[i];
    g.nodes.push_back(n);
  }
  g.neighbors.resize(classes.size());
  for (auto [a, b] : edges) {
    g.neighbors[a].push_back(b);
    g.neighbors[b].push_back(a);
  }
  return g;
}

std::size_t count_ones(const SpatialMaps& m, std::size_t channel) {
  std::size_t c = 0;
  for (std::size_t r = 0; r < kMapSide; ++r) {
    for (std::size_t k = 0; k < kMapSide; ++k) c += map_cell(m, channel, r, k);
  }
  return c;
}

GenConfig small_corpus_config(std::uint64_t seed = 3) {
  GenConfig cfg;
  cfg.train_scenes = 40;
  cfg.val_scenes = 5;
  cfg.test_scenes = 5;
  cfg.seed = seed;
  return cfg;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hlnet_scenedata_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

// ---- generate_corpus --------------------------------------------------------------

TEST(GenerateCorpus, SingleClassIsFullyHomophilous) {
  GenConfig cfg = small_corpus_config();
  cfg.num_object_classes = 1;
  cfg.context_groups = 1;
  cfg.homophily = 1.0;
  const Corpus c = generate_corpus(cfg);
  EXPECT_EQ(mean_homophily(c.train), 1.0);
}

TEST(GenerateCorpus, DefaultConfigHitsTargetHomophily) {
  GenConfig cfg;  // h* = 0.2, 10 classes, 500 training scenes
  const Corpus c = generate_corpus(cfg);
  ASSERT_EQ(c.train.size(), 500u);
  const double h = mean_homophily(c.train);
  EXPECT_GE(h, 0.15);
  EXPECT_LE(h, 0.25);
}

TEST(GenerateCorpus, SameSeedIsByteIdentical) {
  const GenConfig cfg = small_corpus_config(9);
  const Corpus a = generate_corpus(cfg), b = generate_corpus(cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(serialize_scenes(a.train), serialize_scenes(b.train));
}

TEST(GenerateCorpus, DifferentSeedsDiffer) {
  EXPECT_NE(generate_corpus(small_corpus_config(1)).train, generate_corpus(small_corpus_config(2)).train);
}

TEST(GenerateCorpus, InfeasibleHomophilyIsConfigError) {
  GenConfig cfg = small_corpus_config();
  cfg.num_object_classes = 2;
  cfg.context_groups = 1;
  cfg.homophily = 0.0;
  ASSERT_GT(min_reachable_homophily(cfg), 0.05);
  EXPECT_THROW(generate_corpus(cfg), ConfigError);
}

TEST(GenerateCorpus, OutOfRangeFieldsAreConfigErrors) {
  GenConfig cfg = small_corpus_config();
  cfg.homophily = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_corpus_config();
  cfg.mix_weight = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(GenerateCorpus, ScenesSatisfyStructuralInvariants) {
  const GenConfig cfg = small_corpus_config(4);
  const Corpus c = generate_corpus(cfg);
  const auto protos = class_prototypes(cfg);
  for (const auto* split : {&c.train, &c.val, &c.test}) {
    for (const auto& g : *split) {
      EXPECT_NO_THROW(g.validate());
      ASSERT_GE(g.size(), static_cast<std::size_t>(cfg.min_nodes));
      ASSERT_LE(g.size(), static_cast<std::size_t>(cfg.max_nodes));
      for (const auto& n : g.nodes) {
        EXPECT_TRUE(n.box.valid());
        EXPECT_GE(n.box.x1, 0.0);
        EXPECT_GE(n.box.y1, 0.0);
        EXPECT_LE(n.box.x2, g.canvas_w);
        EXPECT_LE(n.box.y2, g.canvas_h);
        ASSERT_EQ(n.detector_probs.size(), static_cast<std::size_t>(cfg.num_object_classes));
        EXPECT_NEAR(std::accumulate(n.detector_probs.begin(), n.detector_probs.end(), 0.0), 1.0, 1e-9);
        EXPECT_EQ(n.appearance.size(), static_cast<std::size_t>(cfg.appearance_dim));
      }
      for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_EQ(std::count(g.neighbors[i].begin(), g.neighbors[i].end(), i), 0);
      }
      const auto candidates = all_pairs(g);
      for (const auto& t : g.gt_triplets) {
        EXPECT_NE(t.subject, t.object);
        EXPECT_GE(t.predicate, 0);
        EXPECT_LT(t.predicate, cfg.num_predicates);
        EXPECT_TRUE(std::binary_search(candidates.begin(), candidates.end(), NodePair{t.subject, t.object}));
      }
    }
  }
  for (const auto& p : protos) {
    double norm = 0.0;
    for (double x : p) norm += x * x;
    EXPECT_NEAR(norm, 1.0, 1e-12);
  }
}

TEST(GenerateCorpus, OcclusionRateControlsOccludedNodes) {
  GenConfig none = small_corpus_config();
  none.occlusion_rate = 0.0;
  GenConfig heavy = small_corpus_config();
  heavy.occlusion_rate = 0.6;
  auto occluded_share = [](const Corpus& c) {
    std::size_t occ = 0, total = 0;
    for (const auto& g : c.train) {
      for (std::size_t i = 0; i < g.size(); ++i) occ += heavily_occluded(g, i) ? 1 : 0;
      total += g.size();
    }
    return static_cast<double>(occ) / static_cast<double>(total);
  };
  EXPECT_LT(occluded_share(generate_corpus(none)), occluded_share(generate_corpus(heavy)));
}

TEST(GenerateCorpus, KeyValueRoundTrip) {
  GenConfig cfg = small_corpus_config(77);
  cfg.homophily = 0.35;
  cfg.occlusion_rate = 0.125;
  const GenConfig back = GenConfig::from_key_values(cfg.to_key_values());
  EXPECT_EQ(back.to_key_values(), cfg.to_key_values());
  EXPECT_THROW(GenConfig::from_key_values({{"no_such_key", "1"}}), ConfigError);
}

// ---- homophily ------------------------------------------------------------------

TEST(Homophily, SingleClassCompleteGraph) {
  SceneGraph g = labeled_graph({0, 0, 0, 0}, {});
  g.connect_all();
  EXPECT_EQ(homophily(g), 1.0);
}

TEST(Homophily, HeterophilousStar) {
  const SceneGraph g = labeled_graph({0, 1, 1, 1}, {{0, 1}, {0, 2}, {0, 3}});
  EXPECT_EQ(homophily(g), 0.0);
}

TEST(Homophily, TriangleTwoOfOneClass) {
  const SceneGraph g = labeled_graph({0, 0, 1}, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_NEAR(homophily(g), 1.0 / 3.0, 1e-15);
}

TEST(Homophily, IsolatedNodesAreSkipped) {
  const SceneGraph g = labeled_graph({0, 0, 1}, {{0, 1}});
  EXPECT_EQ(homophily(g), 1.0);
}

TEST(Homophily, NoEligibleNodeIsUndefined) {
  const SceneGraph g = labeled_graph({0, 1}, {});
  EXPECT_THROW(homophily(g), UndefinedMetricError);
}

TEST(HomophilyProperty, BoundedAndExtremal) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(2, 12));
    const int classes = rng.integer(1, 4);
    std::vector<int> labels(n);
    for (auto& l : labels) l = rng.integer(0, classes - 1);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.coin(0.5)) edges.emplace_back(i, j);
      }
    }
    if (edges.empty()) edges.emplace_back(0, 1);
    const double h = homophily(labeled_graph(labels, edges));
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 1.0);
    EXPECT_EQ(homophily(labeled_graph(std::vector<int>(n, 2), edges)), 1.0);

    // Properly 2-colored bipartite graph: edges only across a random cut.
    std::vector<int> side(n);
    for (auto& s : side) s = rng.integer(0, 1);
    side[0] = 0;
    side[1] = 1;
    std::vector<std::pair<std::size_t, std::size_t>> cross;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (side[i] != side[j] && (rng.coin(0.6) || (i == 0 && j == 1))) cross.emplace_back(i, j);
      }
    }
    EXPECT_EQ(homophily(labeled_graph(side, cross)), 0.0);
  }
}

// ---- spatial maps -----------------------------------------------------------------

TEST(SpatialMaps, WholeCanvasBothChannelsFull) {
  const Box canvas{0, 0, 100, 100};
  const SpatialMaps m = spatial_binary_maps(canvas, canvas);
  EXPECT_EQ(count_ones(m, 0), kMapSide * kMapSide);
  EXPECT_EQ(count_ones(m, 1), kMapSide * kMapSide);
}

TEST(SpatialMaps, DisjointHalvesHaveZeroProduct) {
  const SpatialMaps m = spatial_binary_maps({0, 0, 49, 100}, {51, 0, 100, 100});
  for (std::size_t r = 0; r < kMapSide; ++r) {
    for (std::size_t k = 0; k < kMapSide; ++k) EXPECT_EQ(map_cell(m, 0, r, k) * map_cell(m, 1, r, k), 0);
  }
}

TEST(SpatialMaps, LeftHalfOfUnionCountsSevenColumns) {
  const SpatialMaps m = spatial_binary_maps({20, 10, 50, 70}, {20, 10, 80, 70});
  EXPECT_EQ(count_ones(m, 0), 7u * 14u);
  EXPECT_EQ(count_ones(m, 1), 14u * 14u);
}

TEST(SpatialMapsProperty, SwappingBoxesSwapsChannels) {
  Rng rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const Box a = hlnet_test::random_box(rng), b = hlnet_test::random_box(rng);
    const SpatialMaps ab = spatial_binary_maps(a, b), ba = spatial_binary_maps(b, a);
    for (std::size_t r = 0; r < kMapSide; ++r) {
      for (std::size_t k = 0; k < kMapSide; ++k) {
        EXPECT_EQ(map_cell(ab, 0, r, k), map_cell(ba, 1, r, k));
        EXPECT_EQ(map_cell(ab, 1, r, k), map_cell(ba, 0, r, k));
      }
    }
  }
}

// ---- spatial encoder ----------------------------------------------------------------

TEST(SpatialEncoder, ZeroMapsZeroBiasesGiveZero) {
  ParamStore store(5);
  SpatialEncoderParams p = make_spatial_encoder(store, "sp", 6);
  for (auto& t : store.params()) {
    if (t.id.ends_with("bias")) std::fill(t.array.mutable_values().begin(), t.array.mutable_values().end(), 0.0);
  }
  SpatialMaps zero{};
  const std::vector<SpatialMaps> maps{zero};
  const DiffArray out = encode_spatial(std::span<const SpatialMaps>(maps), p);
  ASSERT_EQ(out.shape(), (Shape{1, 6}));
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(SpatialEncoder, OutputWidthForAnyInput) {
  Rng rng(23);
  ParamStore store(6);
  const SpatialEncoderParams p = make_spatial_encoder(store, "sp", 9);
  std::vector<SpatialMaps> maps;
  for (int i = 0; i < 5; ++i) maps.push_back(spatial_binary_maps(hlnet_test::random_box(rng), hlnet_test::random_box(rng)));
  EXPECT_EQ(encode_spatial(std::span<const SpatialMaps>(maps), p).shape(), (Shape{5, 9}));
}

TEST(SpatialEncoder, WrongInputSizeIsDimensionError) {
  ParamStore store(6);
  const SpatialEncoderParams p = make_spatial_encoder(store, "sp", 4);
  const std::vector<double> bad(kMapCells - 1, 0.0);
  EXPECT_THROW(encode_spatial(std::span<const double>(bad), p), DimensionError);
}

TEST(SpatialEncoder, GradientMatchesFiniteDifferences) {
  Rng rng(24);
  ParamStore store(7);
  const SpatialEncoderParams p = make_spatial_encoder(store, "sp", 3);
  // Zero biases put every empty patch exactly on the ReLU kink; move off it.
  for (auto& t : store.params()) {
    if (!t.id.ends_with("bias")) continue;
    for (double& v : t.array.mutable_values()) v = (rng.coin() ? 1.0 : -1.0) * rng.uniform(0.1, 0.5);
  }
  std::vector<SpatialMaps> maps;
  for (int i = 0; i < 2; ++i) maps.push_back(spatial_binary_maps(hlnet_test::random_box(rng), hlnet_test::random_box(rng)));
  const auto report = finite_diff_check(
      [&] { return sum(tanh_act(encode_spatial(std::span<const SpatialMaps>(maps), p))); }, store);
  EXPECT_TRUE(report.passed) << report.worst_param << " rel " << report.max_rel_error;
}

// ---- union appearance ------------------------------------------------------------

TEST(UnionAppearance, EqualMembersGiveMemberPlusNoise) {
  GenConfig gen = hlnet_test::tiny_gen_config();
  SceneGraph g = hlnet_test::make_scene({{10, 10, 30, 30}, {10, 10, 30, 30}}, {0, 0}, {}, gen);
  g.nodes[1].appearance = g.nodes[0].appearance;
  const std::vector<std::size_t> ids{0, 1};
  const auto u = union_appearance(g, ids);
  ASSERT_EQ(u.size(), g.nodes[0].appearance.size());
  double dev = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) dev = std::max(dev, std::abs(u[k] - g.nodes[0].appearance[k]));
  EXPECT_LT(dev, 6.0 * gen.union_noise);
  g.union_noise = 0.0;
  const auto clean = union_appearance(g, ids);
  for (std::size_t k = 0; k < u.size(); ++k) EXPECT_NEAR(clean[k], g.nodes[0].appearance[k], 1e-12);
}

TEST(UnionAppearance, OrderIndependentAndThreeNodeWidth) {
  Rng rng(25);
  const GenConfig gen = hlnet_test::tiny_gen_config();
  const SceneGraph g = hlnet_test::random_scene(rng, 4, gen);
  const std::vector<std::size_t> ij{1, 3}, ji{3, 1};
  EXPECT_EQ(union_appearance(g, ij), union_appearance(g, ji));
  const std::vector<std::size_t> ijk{2, 0, 3}, kji{3, 0, 2};
  EXPECT_EQ(union_appearance(g, ijk).size(), static_cast<std::size_t>(gen.appearance_dim));
  EXPECT_EQ(union_appearance(g, ijk), union_appearance(g, kji));
}

TEST(UnionAppearance, DuplicateIdsAreContractError) {
  Rng rng(26);
  const SceneGraph g = hlnet_test::random_scene(rng, 3, hlnet_test::tiny_gen_config());
  const std::vector<std::size_t> dup{1, 1};
  EXPECT_THROW(union_appearance(g, dup), ContractError);
}

// ---- node input ------------------------------------------------------------------

TEST(NodeInput, ZeroWeightsGiveZero) {
  Rng rng(27);
  const GenConfig gen = hlnet_test::tiny_gen_config();
  const SceneGraph g = hlnet_test::random_scene(rng, 3, gen);
  const DiffArray f = node_features(g);
  Linear proj{DiffArray::zeros({5, f.cols()}), DiffArray::zeros({5})};
  const DiffArray x = node_input(f, proj);
  ASSERT_EQ(x.shape(), (Shape{3, 5}));
  for (double v : x.values()) EXPECT_EQ(v, 0.0);
}

TEST(NodeInput, IdenticalNodesGiveIdenticalRows) {
  const GenConfig gen = hlnet_test::tiny_gen_config();
  SceneGraph g = hlnet_test::make_scene({{10, 10, 20, 20}, {50, 50, 60, 60}}, {1, 2}, {}, gen);
  g.nodes[1].box = g.nodes[0].box;
  g.nodes[1].appearance = g.nodes[0].appearance;
  g.nodes[1].detector_probs = g.nodes[0].detector_probs;
  ParamStore store(8);
  const Linear proj = make_linear(store, "in", node_feature_width(4, 3), 6);
  const DiffArray x = node_input(node_features(g), proj);
  ASSERT_EQ(x.cols(), 6u);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(x.at(0, k), x.at(1, k));
}

TEST(NodeInput, WidthMismatchIsDimensionError) {
  Rng rng(28);
  const SceneGraph g = hlnet_test::random_scene(rng, 3, hlnet_test::tiny_gen_config());
  ParamStore store(9);
  const Linear proj = make_linear(store, "in", 5, 6);
  EXPECT_THROW(node_input(node_features(g), proj), DimensionError);
}

// ---- frequency bias ---------------------------------------------------------------

namespace {

SceneGraph pair_scene(const std::vector<int>& predicates, int cs = 0, int co = 1) {
  SceneGraph g = labeled_graph({cs, co}, {});
  for (int p : predicates) g.gt_triplets.push_back({0, 1, p});
  g.connect_all();
  return g;
}

}  // namespace

TEST(FrequencyBias, SinglePredicateIsArgmax) {
  const FrequencyBias f = build_frequency_bias({pair_scene({2})}, 2, 3);
  const auto row = f.row(0, 1);
  EXPECT_EQ(std::max_element(row.begin(), row.end()) - row.begin(), 2);
}

TEST(FrequencyBias, UnseenPairIsZero) {
  const FrequencyBias f = build_frequency_bias({pair_scene({0})}, 2, 2);
  EXPECT_FALSE(f.seen(1, 0));
  for (double v : f.row(1, 0)) EXPECT_EQ(v, 0.0);
}

TEST(FrequencyBias, LaplaceSmoothedCounts) {
  const FrequencyBias f = build_frequency_bias({pair_scene({0, 0, 0, 1})}, 2, 2);
  const auto row = f.row(0, 1);
  EXPECT_NEAR(row[0], std::log(4.0 / 6.0), 1e-15);
  EXPECT_NEAR(row[1], std::log(2.0 / 6.0), 1e-15);
  const auto with_bg = f.logits_with_background(0, 1);
  ASSERT_EQ(with_bg.size(), 3u);
  EXPECT_EQ(with_bg[0], 0.0);
}

TEST(FrequencyBiasProperty, SeenRowsExponentiateToDistributions) {
  const GenConfig cfg = small_corpus_config(12);
  const Corpus c = generate_corpus(cfg);
  const FrequencyBias f = build_frequency_bias(c.train, cfg.num_object_classes, cfg.num_predicates);
  int seen = 0;
  for (int s = 0; s < cfg.num_object_classes; ++s) {
    for (int o = 0; o < cfg.num_object_classes; ++o) {
      if (!f.seen(s, o)) continue;
      ++seen;
      double total = 0.0;
      for (double v : f.row(s, o)) total += std::exp(v);
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
  EXPECT_GT(seen, 0);
}

// ---- pair sampling ------------------------------------------------------------------

namespace {

SceneGraph sampling_scene(std::size_t n, std::size_t gt) {
  std::vector<int> classes(n, 0);
  SceneGraph g = labeled_graph(classes, {});
  g.connect_all();
  for (std::size_t k = 0; k < gt; ++k) g.gt_triplets.push_back({k, k + 1, 0});
  return g;
}

std::size_t background_count(const SceneGraph& g, const std::vector<NodePair>& pairs) {
  const auto targets = pair_targets(g, pairs);
  return static_cast<std::size_t>(std::count(targets.begin(), targets.end(), 0));
}

}  // namespace

TEST(SamplePairs, RatioArithmetic) {
  const SceneGraph g = sampling_scene(5, 2);  // 20 candidate pairs
  const auto pairs = sample_pairs(g, 3, 1);
  EXPECT_EQ(pairs.size(), 8u);
  EXPECT_EQ(background_count(g, pairs), 6u);
}

TEST(SamplePairs, ExhaustsBackground) {
  SceneGraph g = sampling_scene(3, 2);  // 6 candidates, 2 gt
  const auto pairs = sample_pairs(g, 3, 1);
  EXPECT_EQ(pairs.size(), 6u);
  EXPECT_EQ(background_count(g, pairs), 4u);
}

TEST(SamplePairs, SeedDeterminesSample) {
  const SceneGraph g = sampling_scene(8, 2);
  EXPECT_EQ(sample_pairs(g, 3, 42), sample_pairs(g, 3, 42));
  std::set<std::vector<NodePair>> distinct;
  for (std::uint64_t s = 0; s < 10; ++s) distinct.insert(sample_pairs(g, 3, s));
  EXPECT_GT(distinct.size(), 1u);
}

TEST(SamplePairsProperty, ContainsEveryGroundTruthPair) {
  Rng rng(29);
  const GenConfig gen = hlnet_test::tiny_gen_config();
  for (int trial = 0; trial < 100; ++trial) {
    const SceneGraph g = hlnet_test::random_scene(rng, static_cast<std::size_t>(rng.integer(2, 7)), gen);
    const int ratio = rng.integer(0, 4);
    const auto pairs = sample_pairs(g, ratio, static_cast<std::uint64_t>(trial));
    std::set<NodePair> gt;
    for (const auto& t : g.gt_triplets) gt.insert({t.subject, t.object});
    for (const auto& p : gt) EXPECT_TRUE(std::binary_search(pairs.begin(), pairs.end(), p));
    const std::size_t bg_available = g.size() * (g.size() - 1) - gt.size();
    EXPECT_EQ(background_count(g, pairs), std::min(bg_available, gt.size() * static_cast<std::size_t>(ratio)));
    EXPECT_TRUE(std::is_sorted(pairs.begin(), pairs.end()));
    EXPECT_EQ(std::adjacent_find(pairs.begin(), pairs.end()), pairs.end());
  }
}

// ---- iou ----------------------------------------------------------------------------

TEST(Iou, Identical) { EXPECT_EQ(iou({0, 0, 2, 3}, {0, 0, 2, 3}), 1.0); }

TEST(Iou, Disjoint) { EXPECT_EQ(iou({0, 0, 1, 1}, {2, 2, 3, 3}), 0.0); }

TEST(Iou, UnitSquaresHalfOverlap) { EXPECT_NEAR(iou({0, 0, 1, 1}, {0.5, 0, 1.5, 1}), 1.0 / 3.0, 1e-15); }

TEST(IouProperty, SymmetricAndExtremal) {
  Rng rng(30);
  for (int trial = 0; trial < 1000; ++trial) {
    const Box a = hlnet_test::random_box(rng), b = hlnet_test::random_box(rng);
    const double v = iou(a, b);
    EXPECT_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(iou(a, a), 1.0);
    const bool disjoint = a.x2 <= b.x1 || b.x2 <= a.x1 || a.y2 <= b.y1 || b.y2 <= a.y1;
    EXPECT_EQ(v == 0.0, disjoint);
    if (!(a == b)) EXPECT_LT(v, 1.0);
  }
}

// ---- corpus I/O ----------------------------------------------------------------------

TEST(CorpusIo, WriteThenReadIsIdentity) {
  const GenConfig cfg = small_corpus_config(31);
  const Corpus c = generate_corpus(cfg);
  const auto dir = temp_dir("roundtrip");
  write_corpus(dir, c, cfg);
  const LoadedCorpus back = read_corpus(dir);
  EXPECT_EQ(back.config.to_key_values(), cfg.to_key_values());
  EXPECT_EQ(back.corpus, c);
  EXPECT_EQ(corpus_hash(dir), corpus_hash(dir));
  std::filesystem::remove_all(dir);
}

TEST(CorpusIo, TruncatedRecordIsParseErrorWithLine) {
  const Corpus c = generate_corpus(small_corpus_config(32));
  std::string text = serialize_scenes(c.train);
  const auto second_line = text.find('\n') + 1;
  text.resize(second_line + 20);
  try {
    parse_scenes(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(CorpusIo, MalformedFieldReportsLine) {
  const std::string text = "scene 100 100 node 0 1 1 5 5 0 node 1 2 2 6 6 0\nscene 100 100 node 0 1 1 x 5 0\n";
  try {
    parse_scenes(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(CorpusIo, EmptyTextIsEmptyCorpus) { EXPECT_TRUE(parse_scenes("").empty()); }

TEST(CorpusIo, EmptyFilesReadAsEmptySplits) {
  GenConfig cfg = small_corpus_config();
  cfg.train_scenes = cfg.val_scenes = cfg.test_scenes = 0;
  const auto dir = temp_dir("empty");
  write_corpus(dir, generate_corpus(cfg), cfg);
  EXPECT_EQ(read_file(dir / "train.sg"), "");
  const LoadedCorpus back = read_corpus(dir);
  EXPECT_TRUE(back.corpus.train.empty());
  EXPECT_TRUE(back.corpus.test.empty());
  std::filesystem::remove_all(dir);
}

TEST(CorpusIo, SixDecimalGeometry) {
  const GenConfig gen = hlnet_test::tiny_gen_config();
  const SceneGraph g = hlnet_test::make_scene({{1.25, 2.5, 10.125, 20.0625}, {3, 3, 4, 4}}, {0, 1}, {{0, 1, 1}}, gen);
  EXPECT_EQ(serialize_scenes({g}),
            "scene 100.000000 100.000000 node 0 1.250000 2.500000 10.125000 20.062500 0 "
            "node 1 3.000000 3.000000 4.000000 4.000000 1 rel 0 1 1\n");
}
