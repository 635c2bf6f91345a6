#include "hlnet/hmp.hpp"

#include "hlnet/errors.hpp"
#include "hlnet/ops.hpp"

namespace hlnet {

HmpParams make_hmp_params(ParamStore& store, const std::string& id, std::size_t width, int num_classes) {
  HmpParams p;
  p.node_hidden = make_linear(store, id + ".node_hidden", width + 2 * static_cast<std::size_t>(num_classes), width);
  p.node_head = store.uniform(id + ".node_head", {width});
  p.edge_first = make_fusion(store, id + ".edge_first", width);
  p.edge_second = make_fusion(store, id + ".edge_second", width);
  p.edge_head = store.uniform(id + ".edge_head", {width});
  return p;
}

DiffArray node_signs(const DiffArray& edge_features, const DiffArray& probs, const NeighborGraph& graph,
                     const HmpParams& p) {
  if (graph.num_edges() == 0) return DiffArray::zeros({0});
  const DiffArray parts[] = {edge_features, gather_rows(probs, graph.dst), gather_rows(probs, graph.src)};
  return tanh_act(matvec(relu(linear(p.node_hidden, concat_cols(parts))), p.node_head));
}

DiffArray edge_signs(const DiffArray& a, const DiffArray& b, const DiffArray& c, const HmpParams& p) {
  return tanh_act(matvec(fuse(fuse(a, b, p.edge_first), c, p.edge_second), p.edge_head));
}

std::vector<int> node_sign_labels(const SceneGraph& g, const NeighborGraph& graph) {
  std::vector<int> labels;
  labels.reserve(graph.num_edges());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const int a = g.nodes[static_cast<std::size_t>(graph.dst[e])].class_label;
    const int b = g.nodes[static_cast<std::size_t>(graph.src[e])].class_label;
    labels.push_back(a == b ? 1 : -1);
  }
  return labels;
}

EdgeSignTargets edge_sign_labels(const MessagePlan& plan, const std::vector<int>& targets) {
  if (targets.size() != plan.num_pairs()) throw DimensionError("edge_sign_labels: one target per pair expected");
  EdgeSignTargets out;
  for (std::size_t m = 0; m < plan.num_messages(); ++m) {
    const int a = targets[static_cast<std::size_t>(plan.source[m])];
    const int b = targets[plan.target[m]];
    if (a == 0 || b == 0) continue;
    out.messages.push_back(static_cast<std::int64_t>(m));
    out.labels.push_back(a == b ? 1 : -1);
  }
  return out;
}

}  // namespace hlnet
