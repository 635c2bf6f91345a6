#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <vector>

#include "hlnet/art.hpp"
#include "hlnet/errors.hpp"
#include "hlnet/gradcheck.hpp"
#include "hlnet/ops.hpp"
#include "hlnet/rfp.hpp"
#include "hlnet/sampling.hpp"
#include "hlnet_test/generators.hpp"
#include "hlnet_test/reference.hpp"

using namespace hlnet;
using hlnet_test::complete;
using hlnet_test::every_pair;
using hlnet_test::random_neighbors;
using hlnet_test::random_pairs;
using hlnet_test::Rng;
namespace ref = hlnet_test::ref;

namespace {

void fill(DiffArray a, double v) { std::fill(a.mutable_values().begin(), a.mutable_values().end(), v); }

void set_identity(DiffArray a) {
  fill(a, 0.0);
  for (std::size_t k = 0; k < a.shape()[0]; ++k) a.mutable_values()[k * a.shape()[1] + k] = 1.0;
}

void randomize(ParamStore& store, Rng& rng, double scale = 0.5) {
  for (auto& p : store.params()) {
    for (double& v : p.array.mutable_values()) v = rng.uniform(-scale, scale);
  }
}

// Joint coefficient normalization and messages transcribed per pair: the
// set is {c(j <- l) : l in N_j} followed by {c(i <- m) : m in N_i}.
struct RefMessages {
  std::vector<double> alpha_sum;  // per pair, sum of alpha-hat over the joint set
  ref::Mat h;                     // per pair
};

RefMessages ref_messages(const std::vector<std::vector<std::size_t>>& nb, const std::vector<NodePair>& pairs,
                         const std::map<NodePair, double>& coef, const ref::Mat& p,
                         const std::map<std::pair<NodePair, NodePair>, double>& signs = {}) {
  std::map<NodePair, std::size_t> index;
  for (std::size_t k = 0; k < pairs.size(); ++k) index[pairs[k]] = k;
  RefMessages out;
  const std::size_t width = p.empty() ? 0 : p[0].size();
  for (const auto& [i, j] : pairs) {
    struct Member {
      double c;
      NodePair sender;
    };
    std::vector<Member> set;
    for (auto l : nb[j]) set.push_back({coef.at({j, l}), {i, l}});
    for (auto m : nb[i]) set.push_back({coef.at({i, m}), {m, j}});
    ref::Vec h(width, 0.0);
    double total = 0.0;
    if (!set.empty()) {
      ref::Vec c;
      for (const auto& s : set) c.push_back(s.c);
      const ref::Vec a = ref::softmax(c);
      for (std::size_t t = 0; t < set.size(); ++t) {
        total += a[t];
        const auto it = index.find(set[t].sender);
        if (it == index.end() || set[t].sender == NodePair{i, j}) continue;
        const auto sit = signs.find({set[t].sender, {i, j}});
        const double q = sit == signs.end() ? 1.0 : sit->second;
        h = ref::add(h, ref::scaled(p[it->second], q * a[t]));
      }
    }
    out.alpha_sum.push_back(total);
    out.h.push_back(h);
  }
  return out;
}

std::map<NodePair, double> edge_coefficients(const NeighborGraph& g, const DiffArray& c) {
  std::map<NodePair, double> m;
  for (std::size_t e = 0; e < g.num_edges(); ++e) m[{static_cast<std::size_t>(g.dst[e]), static_cast<std::size_t>(g.src[e])}] = c[e];
  return m;
}

bool bitwise_equal(const DiffArray& a, const DiffArray& b) {
  return a.size() == b.size() && std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

// ---- fusion ----------------------------------------------------------------------------

TEST(Fuse, EqualInputsIdentityWeights) {
  Rng rng(1);
  ParamStore store(1);
  const FusionParams f = make_fusion(store, "f", 4);
  set_identity(f.left.weight);
  set_identity(f.right.weight);
  const DiffArray x = hlnet_test::random_constant(rng, {2, 4});
  const DiffArray out = fuse(x, x, f);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_EQ(out[k], std::max(2.0 * x[k], 0.0));
}

TEST(Fuse, HandEvaluatedScalar) {
  ParamStore store(1);
  const FusionParams f = make_fusion(store, "f", 1);
  set_identity(f.left.weight);
  set_identity(f.right.weight);
  const DiffArray out = fuse(DiffArray::constant({1}, {1.0}), DiffArray::constant({1}, {-1.0}), f);
  EXPECT_EQ(out[0], -4.0);
}

TEST(Fuse, ZeroWeightsGiveZero) {
  Rng rng(2);
  ParamStore store(1);
  const FusionParams f = make_fusion(store, "f", 3);
  fill(f.left.weight, 0.0);
  fill(f.right.weight, 0.0);
  const DiffArray out = fuse(hlnet_test::random_constant(rng, {2, 3}), hlnet_test::random_constant(rng, {2, 3}), f);
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(Fuse, ProjectedWidthMismatchIsDimensionError) {
  ParamStore store(1);
  FusionParams f{make_linear(store, "l", 3, 2, false), make_linear(store, "r", 3, 3, false)};
  EXPECT_THROW(fuse(DiffArray::zeros({1, 3}), DiffArray::zeros({1, 3}), f), DimensionError);
}

TEST(FuseProperty, MatchesReferenceAndIsAsymmetric) {
  Rng rng(3);
  int asymmetric = 0;
  for (int trial = 0; trial < 50; ++trial) {
    ParamStore store(static_cast<std::uint64_t>(trial));
    const FusionParams f = make_fusion(store, "f", 3);
    const DiffArray x = hlnet_test::random_constant(rng, {1, 3}), y = hlnet_test::random_constant(rng, {1, 3});
    const ref::Vec expected = ref::fuse(ref::Affine(f.left), ref::Affine(f.right), ref::flat(x), ref::flat(y));
    const DiffArray out = fuse(x, y, f);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(out[k], expected[k], 1e-14);
    asymmetric += ref::flat(fuse(y, x, f)) != ref::flat(out) ? 1 : 0;
  }
  EXPECT_GT(asymmetric, 45);
}

// ---- relationship features and initial scores ---------------------------------------

TEST(RelationshipFeature, ZeroInputsAndWeightsGiveZero) {
  ParamStore store(1);
  const RfpParams p = make_rfp_params(store, "rfp", 3, 2);
  for (auto& t : store.params()) fill(t.array, 0.0);
  const DiffArray z = DiffArray::zeros({2, 3});
  const DiffArray r = relationship_features(z, z, z, p);
  for (double v : r.values()) EXPECT_EQ(v, 0.0);
}

TEST(RelationshipFeature, DirectionMatters) {
  Rng rng(4);
  ParamStore store(2);
  const RfpParams p = make_rfp_params(store, "rfp", 4, 2);
  const DiffArray xi = hlnet_test::random_constant(rng, {1, 4}), xj = hlnet_test::random_constant(rng, {1, 4});
  const DiffArray ctx = hlnet_test::random_constant(rng, {1, 4});
  EXPECT_NE(ref::flat(relationship_features(xi, xj, ctx, p)), ref::flat(relationship_features(xj, xi, ctx, p)));
}

TEST(RelationshipFeature, LeftAssociativeFusionChain) {
  Rng rng(5);
  ParamStore store(3);
  const RfpParams p = make_rfp_params(store, "rfp", 3, 2);
  const DiffArray xi = hlnet_test::random_constant(rng, {1, 3}), xj = hlnet_test::random_constant(rng, {1, 3});
  const DiffArray ctx = hlnet_test::random_constant(rng, {1, 3});
  const ref::Vec inner = ref::fuse(ref::Affine(p.fuse_nodes.left), ref::Affine(p.fuse_nodes.right), ref::flat(xi), ref::flat(xj));
  const ref::Vec expected = ref::fuse(ref::Affine(p.fuse_context.left), ref::Affine(p.fuse_context.right), inner, ref::flat(ctx));
  const DiffArray r = relationship_features(xi, xj, ctx, p);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(r[k], expected[k], 1e-13);
}

TEST(RelationshipFeature, GradientMatchesFiniteDifferences) {
  Rng rng(6);
  ParamStore store(4);
  const RfpParams p = make_rfp_params(store, "rfp", 3, 2);
  const DiffArray xi = hlnet_test::random_constant(rng, {2, 3}), xj = hlnet_test::random_constant(rng, {2, 3});
  const DiffArray ctx = hlnet_test::random_constant(rng, {2, 3}), probe = hlnet_test::random_constant(rng, {2, 3});
  const auto report = finite_diff_check([&] { return sum(mul(relationship_features(xi, xj, ctx, p), probe)); }, store);
  EXPECT_TRUE(report.passed) << report.worst_param << " " << report.max_rel_error;
}

TEST(InitScores, ZeroHeadGivesZeroLogits) {
  Rng rng(7);
  ParamStore store(5);
  const RfpParams p = make_rfp_params(store, "rfp", 4, 3);
  const DiffArray s = init_scores(hlnet_test::random_constant(rng, {2, 4}), p);
  EXPECT_EQ(s.shape(), (Shape{2, 4}));
  for (double v : s.values()) EXPECT_EQ(v, 0.0);
}

TEST(InitScores, MatchesReference) {
  Rng rng(8);
  ParamStore store(6);
  const RfpParams p = make_rfp_params(store, "rfp", 4, 5);
  randomize(store, rng);
  const DiffArray r = hlnet_test::random_constant(rng, {3, 4});
  const DiffArray s = init_scores(r, p);
  ASSERT_EQ(s.shape(), (Shape{3, 6}));
  for (std::size_t i = 0; i < 3; ++i) {
    const ref::Vec expected = ref::Affine(p.scores)(ref::relu(ref::Affine(p.hidden)(ref::row(r, i))));
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(s.at(i, k), expected[k], 1e-14);
  }
}

// ---- messages -------------------------------------------------------------------------

TEST(NeighborMessages, IsolatedPairReceivesNothing) {
  Rng rng(9);
  const auto graph = NeighborGraph::from_neighbors({{}, {}, {}});
  const MessagePlan plan = build_message_plan(graph, every_pair(3));
  EXPECT_EQ(plan.num_messages(), 0u);
  const DiffArray h = neighbor_messages(hlnet_test::random_constant(rng, {6, 3}), plan,
                                        message_weights(joint_coefficients(DiffArray::zeros({0}), plan), plan, DiffArray()));
  for (double v : h.values()) EXPECT_EQ(v, 0.0);
}

TEST(NeighborMessages, ClosedSignsGiveZero) {
  Rng rng(10);
  const auto graph = NeighborGraph::from_neighbors(complete(3));
  const MessagePlan plan = build_message_plan(graph, every_pair(3));
  const DiffArray alpha = joint_coefficients(hlnet_test::random_constant(rng, {6}), plan);
  const DiffArray w = message_weights(alpha, plan, DiffArray::zeros({plan.num_messages()}));
  const DiffArray h = neighbor_messages(hlnet_test::random_constant(rng, {6, 3}), plan, w);
  for (double v : h.values()) EXPECT_EQ(v, 0.0);
}

TEST(NeighborMessages, ThreeNodeHandSum) {
  // Nodes 0,1,2, N_i = others. Pair (0,1) hears from (0,2) via l=2 in N_1 and
  // from (2,1) via m=2 in N_0; l=0 in N_1 and m=1 in N_0 name no pair.
  // Uniform coefficients make every alpha-hat 1/4.
  const auto graph = NeighborGraph::from_neighbors(complete(3));
  const auto pairs = every_pair(3);  // (0,1) (0,2) (1,0) (1,2) (2,0) (2,1)
  const MessagePlan plan = build_message_plan(graph, pairs);
  std::vector<double> p(6 * 2);
  for (std::size_t k = 0; k < 6; ++k) {
    p[2 * k] = static_cast<double>(k + 1);
    p[2 * k + 1] = 10.0 * static_cast<double>(k + 1);
  }
  const DiffArray scores = DiffArray::constant({6, 2}, p);
  const DiffArray alpha = joint_coefficients(DiffArray::zeros({6}), plan);
  for (double a : alpha.values()) EXPECT_EQ(a, 0.25);
  const DiffArray h = neighbor_messages(scores, plan, message_weights(alpha, plan, DiffArray()));
  // p(0,2) = [2, 20], p(2,1) = [6, 60].
  EXPECT_DOUBLE_EQ(h.at(0, 0), 0.25 * 2 + 0.25 * 6);
  EXPECT_DOUBLE_EQ(h.at(0, 1), 0.25 * 20 + 0.25 * 60);
}

TEST(NeighborMessages, SamplesOnlyFromCandidates) {
  const auto graph = NeighborGraph::from_neighbors(complete(3));
  const std::vector<NodePair> pairs{{0, 1}, {2, 1}};
  const MessagePlan plan = build_message_plan(graph, pairs);
  ASSERT_EQ(plan.num_messages(), 2u);  // (2,1)->(0,1) and (0,1)->(2,1)
  EXPECT_EQ(plan.source[0], 1);
  EXPECT_EQ(plan.target[0], 0u);
  EXPECT_EQ(plan.kind[0], EdgeSignKind::SharedObject);
  EXPECT_THROW(build_message_plan(graph, {{0, 1}, {0, 1}}), ContractError);
  EXPECT_THROW(build_message_plan(graph, {{1, 1}}), ContractError);
}

TEST(MessagesProperty, JointAlphaAndMessagesMatchReference) {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(2, 6));
    const auto nb = random_neighbors(rng, n);
    const auto graph = NeighborGraph::from_neighbors(nb);
    const auto pairs = random_pairs(rng, n);
    const MessagePlan plan = build_message_plan(graph, pairs);
    const DiffArray c = hlnet_test::random_constant(rng, {graph.num_edges()}, -3, 3);
    const DiffArray p = hlnet_test::random_constant(rng, {pairs.size(), 3});
    const DiffArray q = hlnet_test::random_constant(rng, {plan.num_messages()}, -0.99, 0.99);
    std::map<std::pair<NodePair, NodePair>, double> signs;
    for (std::size_t m = 0; m < plan.num_messages(); ++m) signs[{pairs[plan.source[m]], pairs[plan.target[m]]}] = q[m];
    const DiffArray alpha = joint_coefficients(c, plan);
    const DiffArray h = neighbor_messages(p, plan, message_weights(alpha, plan, q));
    const auto expected = ref_messages(nb, pairs, edge_coefficients(graph, c), ref::matrix(p), signs);
    std::vector<double> per_pair(pairs.size(), 0.0);
    for (std::size_t e = 0; e < plan.coef_pair.size(); ++e) per_pair[plan.coef_pair[e]] += alpha[e];
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (expected.alpha_sum[k] > 0.0) EXPECT_NEAR(per_pair[k], 1.0, 1e-9);
      for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(h.at(k, d), expected.h[k][d], 1e-12);
    }
  }
}

// ---- propagation -------------------------------------------------------------------------

TEST(Propagate, ZeroStepsReturnsInitial) {
  Rng rng(12);
  const auto graph = NeighborGraph::from_neighbors(complete(3));
  const MessagePlan plan = build_message_plan(graph, every_pair(3));
  const DiffArray p0 = hlnet_test::random_constant(rng, {6, 3});
  const auto w = message_weights(joint_coefficients(hlnet_test::random_constant(rng, {6}), plan), plan, DiffArray());
  const auto out = propagate(p0, plan, w, -0.5, 0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(bitwise_equal(out[0], p0));
}

TEST(Propagate, IsolatedPairFixedPoint) {
  Rng rng(13);
  const auto graph = NeighborGraph::from_neighbors({{}, {}});
  const MessagePlan plan = build_message_plan(graph, every_pair(2));
  const DiffArray p0 = hlnet_test::random_constant(rng, {2, 4});
  for (double beta : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    for (int k = 1; k <= 8; ++k) {
      const auto out = propagate(p0, plan, DiffArray::zeros({0}), beta, k);
      EXPECT_TRUE(bitwise_equal(out.back(), p0)) << beta << " " << k;
    }
  }
}

TEST(Propagate, FullTeleportIsIdentity) {
  Rng rng(14);
  const auto graph = NeighborGraph::from_neighbors(complete(4));
  const MessagePlan plan = build_message_plan(graph, every_pair(4));
  const DiffArray p0 = hlnet_test::random_constant(rng, {12, 3});
  const auto w = message_weights(joint_coefficients(hlnet_test::random_constant(rng, {12}), plan), plan, DiffArray());
  const auto out = propagate(p0, plan, w, 0.0, 5);
  for (const auto& p : out) EXPECT_TRUE(bitwise_equal(p, p0));
}

TEST(Propagate, InvalidSettingsAreConfigErrors) {
  const auto graph = NeighborGraph::from_neighbors({{}, {}});
  const MessagePlan plan = build_message_plan(graph, every_pair(2));
  const DiffArray p0 = DiffArray::zeros({2, 2});
  EXPECT_THROW(propagate(p0, plan, DiffArray::zeros({0}), 1.0, 2), ConfigError);
  EXPECT_THROW(propagate(p0, plan, DiffArray::zeros({0}), -1.0, 2), ConfigError);
  EXPECT_THROW(propagate(p0, plan, DiffArray::zeros({0}), 0.5, -1), ConfigError);
}

TEST(Propagate, NonFiniteStepIsNumericError) {
  const auto graph = NeighborGraph::from_neighbors(complete(3));
  const MessagePlan plan = build_message_plan(graph, every_pair(3));
  const DiffArray p0 = DiffArray::constant({6, 1}, std::vector<double>(6, 1e308));
  const DiffArray w = DiffArray::constant({plan.num_messages()}, std::vector<double>(plan.num_messages(), 1.0));
  ASSERT_GT(plan.num_messages(), 0u);
  try {
    propagate(p0, plan, w, 0.9, 3);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(PropagateProperty, MatchesTeleportRecurrence) {
  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3;
    const auto nb = complete(n);
    const auto graph = NeighborGraph::from_neighbors(nb);
    const auto pairs = every_pair(n);
    const MessagePlan plan = build_message_plan(graph, pairs);
    const double beta = rng.uniform(0.01, 0.99);
    const int steps = rng.integer(1, 6);
    const DiffArray c = hlnet_test::random_constant(rng, {graph.num_edges()}, -2, 2);
    const DiffArray p0 = hlnet_test::random_constant(rng, {pairs.size(), 3});
    const auto out = propagate(p0, plan, message_weights(joint_coefficients(c, plan), plan, DiffArray()), beta, steps);
    ref::Mat p = ref::matrix(p0);
    const ref::Mat initial = p;
    for (int k = 0; k < steps; ++k) {
      const auto h = ref_messages(nb, pairs, edge_coefficients(graph, c), p).h;
      for (std::size_t r = 0; r < p.size(); ++r) p[r] = ref::add(ref::scaled(ref::add(p[r], h[r]), beta), ref::scaled(initial[r], 1.0 - beta));
    }
    for (std::size_t r = 0; r < p.size(); ++r) {
      for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(out.back().at(r, d), p[r][d], 1e-12);
    }
  }
}

TEST(PropagateProperty, IdentityForZeroBetaOnRandomGraphs) {
  Rng rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(2, 7));
    const auto graph = NeighborGraph::from_neighbors(random_neighbors(rng, n));
    const MessagePlan plan = build_message_plan(graph, random_pairs(rng, n));
    const DiffArray p0 = hlnet_test::random_constant(rng, {plan.num_pairs(), 4});
    const DiffArray q = hlnet_test::random_constant(rng, {plan.num_messages()}, -0.9, 0.9);
    const auto w = message_weights(joint_coefficients(hlnet_test::random_constant(rng, {graph.num_edges()}), plan), plan, q);
    EXPECT_TRUE(bitwise_equal(propagate(p0, plan, w, 0.0, rng.integer(1, 8)).back(), p0));
  }
}

// ---- relationship classification -----------------------------------------------------

TEST(ClassifyRelationships, ZeroBiasIsPlainSoftmax) {
  Rng rng(17);
  const DiffArray p = hlnet_test::random_constant(rng, {2, 4});
  EXPECT_EQ(ref::flat(softmax(relationship_logits(p, DiffArray::zeros({2, 4})))), ref::flat(softmax(p)));
}

TEST(ClassifyRelationships, SumsToOne) {
  Rng rng(18);
  for (int trial = 0; trial < 100; ++trial) {
    const DiffArray t = softmax(relationship_logits(hlnet_test::random_constant(rng, {1, 7}, -20, 20),
                                                    hlnet_test::random_constant(rng, {1, 7}, -5, 0)));
    EXPECT_NEAR(std::accumulate(t.values().begin(), t.values().end(), 0.0), 1.0, 1e-12);
  }
}

TEST(ClassifyRelationships, StrongBiasDominatesSmallLogits) {
  Rng rng(19);
  const DiffArray p = hlnet_test::random_constant(rng, {1, 5}, -1e-3, 1e-3);
  const std::vector<double> f{0, -12, 10, -15, -12};
  const auto v2 = ref::flat(softmax(relationship_logits(p, DiffArray::constant({1, 5}, f))));
  EXPECT_EQ(std::max_element(f.begin(), f.end()) - f.begin(), 2);
  EXPECT_EQ(std::max_element(v2.begin(), v2.end()) - v2.begin(), 2);
}

// ---- whole-module gradient and equivariance ---------------------------------------------

namespace {

struct RfpChain {
  NeighborGraph graph;
  MessagePlan plan;
  DiffArray x_hat, context, coefficients, bias;
  std::vector<int> targets;
};

DiffArray rfp_loss(const RfpChain& c, const RfpParams& p, double beta, int steps) {
  std::vector<std::int32_t> subj, obj;
  for (const auto& [i, j] : c.plan.pairs) {
    subj.push_back(static_cast<std::int32_t>(i));
    obj.push_back(static_cast<std::int32_t>(j));
  }
  const DiffArray r = relationship_features(gather_rows(c.x_hat, subj), gather_rows(c.x_hat, obj), c.context, p);
  const DiffArray p0 = init_scores(r, p);
  const auto w = message_weights(joint_coefficients(c.coefficients, c.plan), c.plan, DiffArray());
  return cross_entropy(relationship_logits(propagate(p0, c.plan, w, beta, steps).back(), c.bias), c.targets);
}

}  // namespace

TEST(RfpProperty, CrossEntropyGradientMatchesFiniteDifferences) {
  Rng rng(20);
  ParamStore store(21);
  const RfpParams p = make_rfp_params(store, "rfp", 3, 2);
  randomize(store, rng, 0.6);
  RfpChain c;
  c.graph = NeighborGraph::from_neighbors(complete(3));
  c.plan = build_message_plan(c.graph, every_pair(3));
  c.x_hat = hlnet_test::random_constant(rng, {3, 3});
  c.context = hlnet_test::random_constant(rng, {6, 3});
  c.coefficients = hlnet_test::random_constant(rng, {6});
  c.bias = hlnet_test::random_constant(rng, {6, 3}, -1, 0);
  c.targets = {0, 1, 2, 0, 2, 1};
  for (double beta : {-0.5, 0.5}) {
    const auto report = finite_diff_check([&] { return rfp_loss(c, p, beta, 2); }, store);
    EXPECT_TRUE(report.passed) << beta << " " << report.worst_param << " " << report.max_rel_error;
  }
}

TEST(RfpProperty, PermutationEquivariant) {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 4, d = 3;
    ParamStore store(static_cast<std::uint64_t>(trial));
    const RfpParams p = make_rfp_params(store, "rfp", d, 2);
    randomize(store, rng, 0.5);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    const auto nb = complete(n);
    const auto graph = NeighborGraph::from_neighbors(nb);
    const auto pairs = every_pair(n);
    const DiffArray x_hat = hlnet_test::random_constant(rng, {n, d});
    const DiffArray ctx = hlnet_test::random_constant(rng, {pairs.size(), d});
    const DiffArray c = hlnet_test::random_constant(rng, {graph.num_edges()});
    auto scores = [&](const DiffArray& x, const std::vector<NodePair>& pr, const DiffArray& context, const DiffArray& coef) {
      const MessagePlan plan = build_message_plan(graph, pr);
      std::vector<std::int32_t> s, o;
      for (const auto& [i, j] : pr) {
        s.push_back(static_cast<std::int32_t>(i));
        o.push_back(static_cast<std::int32_t>(j));
      }
      const DiffArray p0 = init_scores(relationship_features(gather_rows(x, s), gather_rows(x, o), context, p), p);
      return propagate(p0, plan, message_weights(joint_coefficients(coef, plan), plan, DiffArray()), -0.5, 3).back();
    };
    // Relabel: node i becomes perm[i]; pair rows keep their order with mapped ids.
    std::vector<double> px(n * d), pc(graph.num_edges());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) px[perm[i] * d + k] = x_hat.at(i, k);
    }
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
      pc[graph.find(perm[graph.dst[e]], perm[graph.src[e]])] = c[e];
    }
    std::vector<NodePair> ppairs;
    for (const auto& [i, j] : pairs) ppairs.emplace_back(perm[i], perm[j]);
    const DiffArray a = scores(x_hat, pairs, ctx, c);
    const DiffArray b = scores(DiffArray::constant({n, d}, px), ppairs, ctx, DiffArray::constant({pc.size()}, pc));
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-10);
  }
}
