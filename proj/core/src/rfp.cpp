#include "hlnet/rfp.hpp"

#include <cmath>

#include "hlnet/errors.hpp"
#include "hlnet/ops.hpp"

namespace hlnet {

FusionParams make_fusion(ParamStore& store, const std::string& id, std::size_t width) {
  return {make_linear(store, id + ".left", width, width, false), make_linear(store, id + ".right", width, width, false)};
}

DiffArray fuse(const DiffArray& x, const DiffArray& y, const FusionParams& p) {
  const DiffArray a = linear(p.left, x);
  const DiffArray b = linear(p.right, y);
  if (a.shape() != b.shape()) {
    throw DimensionError("fuse: projected shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()) +
                         " differ");
  }
  const DiffArray diff = sub(a, b);
  return sub(relu(add(a, b)), mul(diff, diff));
}

RfpParams make_rfp_params(ParamStore& store, const std::string& id, std::size_t width, int num_predicates) {
  RfpParams p;
  p.fuse_nodes = make_fusion(store, id + ".fuse_nodes", width);
  p.fuse_context = make_fusion(store, id + ".fuse_context", width);
  p.hidden = make_linear(store, id + ".hidden", width, width);
  // Zero head: initial logits equal the frequency bias. The doubly fused
  // features are quartic in x, so a random head starts with huge logits.
  p.scores.weight = store.zeros(id + ".scores.weight", {static_cast<std::size_t>(num_predicates) + 1, width});
  p.scores.bias = store.zeros(id + ".scores.bias", {static_cast<std::size_t>(num_predicates) + 1});
  return p;
}

DiffArray relationship_features(const DiffArray& x_subject, const DiffArray& x_object, const DiffArray& context,
                                const RfpParams& p) {
  return fuse(fuse(x_subject, x_object, p.fuse_nodes), context, p.fuse_context);
}

DiffArray init_scores(const DiffArray& r, const RfpParams& p) { return linear(p.scores, relu(linear(p.hidden, r))); }

std::int32_t MessagePlan::pair_index(std::size_t i, std::size_t j) const {
  if (i >= num_nodes || j >= num_nodes) return -1;
  return pair_lookup[i * num_nodes + j];
}

MessagePlan build_message_plan(const NeighborGraph& graph, const std::vector<NodePair>& pairs) {
  MessagePlan plan;
  plan.pairs = pairs;
  plan.num_nodes = graph.num_nodes;
  const std::size_t n = graph.num_nodes;
  plan.pair_lookup.assign(n * n, -1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    if (i >= n || j >= n || i == j) throw ContractError("candidate pair outside the scene");
    if (plan.pair_lookup[i * n + j] >= 0) throw ContractError("duplicate candidate pair");
    plan.pair_lookup[i * n + j] = static_cast<std::int32_t>(k);
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    auto add_entries = [&](std::size_t dst, EdgeSignKind kind) {
      for (std::size_t e = 0; e < graph.num_edges(); ++e) {
        if (static_cast<std::size_t>(graph.dst[e]) != dst) continue;
        const auto other = static_cast<std::size_t>(graph.src[e]);
        const std::int64_t entry = static_cast<std::int64_t>(plan.coef_edge.size());
        plan.coef_edge.push_back(static_cast<std::int64_t>(e));
        plan.coef_pair.push_back(static_cast<std::uint32_t>(k));
        // Shared subject: l in N_j sends p_il. Shared object: m in N_i sends p_mj.
        const std::int32_t src =
            kind == EdgeSignKind::SharedSubject ? plan.pair_index(i, other) : plan.pair_index(other, j);
        if (src < 0 || static_cast<std::size_t>(src) == k) continue;
        plan.source.push_back(src);
        plan.target.push_back(static_cast<std::uint32_t>(k));
        plan.coef_entry.push_back(entry);
        plan.kind.push_back(kind);
        plan.third.push_back(other);
      }
    };
    add_entries(j, EdgeSignKind::SharedSubject);
    add_entries(i, EdgeSignKind::SharedObject);
  }
  return plan;
}

DiffArray joint_coefficients(const DiffArray& coefficients, const MessagePlan& plan) {
  if (plan.coef_edge.empty()) return DiffArray::zeros({0});
  const DiffArray gathered = gather_flat(coefficients, plan.coef_edge, {plan.coef_edge.size()});
  return segment_softmax(gathered, plan.coef_pair, plan.num_pairs());
}

DiffArray message_weights(const DiffArray& alpha_hat, const MessagePlan& plan, const DiffArray& signs) {
  if (plan.num_messages() == 0) return DiffArray::zeros({0});
  const DiffArray alpha = gather_flat(alpha_hat, plan.coef_entry, {plan.num_messages()});
  return signs.defined() ? mul(alpha, signs) : alpha;
}

DiffArray neighbor_messages(const DiffArray& scores, const MessagePlan& plan, const DiffArray& weights) {
  if (plan.num_messages() == 0) return DiffArray::zeros(scores.shape());
  return segment_sum(row_scale(gather_rows(scores, plan.source), weights), plan.target, plan.num_pairs());
}

std::vector<DiffArray> propagate(const DiffArray& p0, const MessagePlan& plan, const DiffArray& weights, double beta,
                                 int steps) {
  if (steps < 0) throw ConfigError("propagation steps must be >= 0");
  if (!(std::abs(beta) < 1.0)) throw ConfigError("teleport beta must satisfy |beta| < 1");
  std::vector<DiffArray> out{p0};
  for (int k = 0; k < steps; ++k) {
    const DiffArray& p = out.back();
    const DiffArray h = neighbor_messages(p, plan, weights);
    DiffArray next = add(p0, scale(sub(add(p, h), p0), beta));
    for (double v : next.values()) {
      if (!std::isfinite(v)) throw NumericError("propagation step " + std::to_string(k + 1) + " produced a non-finite score");
    }
    out.push_back(std::move(next));
  }
  return out;
}

DiffArray relationship_logits(const DiffArray& scores, const DiffArray& bias) { return add(scores, bias); }

}  // namespace hlnet
