#include "hlnet/art.hpp"

#include <algorithm>
#include <cmath>

#include "hlnet/errors.hpp"
#include "hlnet/ops.hpp"

namespace hlnet {

std::int64_t NeighborGraph::find(std::size_t i, std::size_t j) const {
  if (i >= num_nodes || j >= num_nodes) return -1;
  return lookup_[i * num_nodes + j];
}

NeighborGraph NeighborGraph::from_neighbors(const std::vector<std::vector<std::size_t>>& neighbors) {
  NeighborGraph g;
  g.num_nodes = neighbors.size();
  g.lookup_.assign(g.num_nodes * g.num_nodes, -1);
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    std::vector<std::size_t> sorted = neighbors[i];
    std::sort(sorted.begin(), sorted.end());
    for (auto j : sorted) {
      if (j == i || j >= g.num_nodes) throw ContractError("neighbor list of node " + std::to_string(i) + " is invalid");
      if (g.lookup_[i * g.num_nodes + j] >= 0) continue;
      g.lookup_[i * g.num_nodes + j] = static_cast<std::int64_t>(g.dst.size());
      g.dst.push_back(static_cast<std::int32_t>(i));
      g.src.push_back(static_cast<std::int32_t>(j));
      g.dst_segment.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return g;
}

std::string to_string(GammaMode mode) {
  switch (mode) {
    case GammaMode::HighPass:
      return "high_pass";
    case GammaMode::LowPass:
      return "low_pass";
    case GammaMode::LastLayer:
      return "last_layer";
  }
  return "?";
}

GammaMode parse_gamma_mode(const std::string& s) {
  if (s == "high_pass") return GammaMode::HighPass;
  if (s == "low_pass") return GammaMode::LowPass;
  if (s == "last_layer") return GammaMode::LastLayer;
  throw ConfigError("unknown gamma mode '" + s + "' (expected high_pass, low_pass or last_layer)");
}

std::vector<double> init_gamma(double tau, int layers) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  if (layers < 1) throw ConfigError("layer count must be >= 1");
  std::vector<double> terms(static_cast<std::size_t>(layers));
  double term = 1.0, abs_sum = 0.0;
  for (auto& t : terms) {
    t = term;
    abs_sum += std::abs(term);
    term *= -tau;
  }
  for (auto& t : terms) t /= abs_sum;
  return terms;
}

ArtParams make_art_params(ParamStore& store, const std::string& id, std::size_t width, std::size_t ffn_hidden,
                          int layers, int num_classes, double tau, GammaMode mode) {
  if (layers < 1) throw ConfigError("layer count must be >= 1");
  ArtParams p;
  p.gamma_mode = mode;
  for (int u = 0; u < layers; ++u) {
    const std::string lid = id + ".layer" + std::to_string(u);
    ArtLayerParams l;
    l.coef_subject = make_linear(store, lid + ".coef_subject", width, width, false);
    l.coef_object = make_linear(store, lid + ".coef_object", width, width, false);
    l.coef_head = store.uniform(lid + ".coef_head", {width});
    l.message = make_linear(store, lid + ".message", width, width, false);
    l.message_norm = make_layer_norm(store, lid + ".message_norm", width);
    l.ffn_norm = make_layer_norm(store, lid + ".ffn_norm", width);
    l.ffn = make_ffn(store, lid + ".ffn", width, ffn_hidden);
    p.layers.push_back(std::move(l));
  }
  const auto n = static_cast<std::size_t>(layers);
  switch (mode) {
    case GammaMode::HighPass:
      p.gamma = store.add(id + ".gamma", {n}, InitSpec::explicit_values(init_gamma(tau, layers)));
      break;
    case GammaMode::LowPass: {
      auto g = init_gamma(tau, layers);
      for (auto& v : g) v = std::abs(v);
      p.gamma = store.add(id + ".gamma", {n}, InitSpec::explicit_values(std::move(g)));
      break;
    }
    case GammaMode::LastLayer: {
      std::vector<double> g(n, 0.0);
      g.back() = 1.0;
      p.gamma = DiffArray::constant({n}, std::move(g));
      break;
    }
  }
  p.output_norm = make_layer_norm(store, id + ".output_norm", width);
  p.input_norm = make_layer_norm(store, id + ".input_norm", width);
  p.classifier = make_linear(store, id + ".classifier", width, static_cast<std::size_t>(num_classes));
  return p;
}

DiffArray contextual_coefficients(const DiffArray& x, const NeighborGraph& graph, const DiffArray& edge_features,
                                  const ArtLayerParams& layer) {
  if (edge_features.rows() != graph.num_edges()) {
    throw DimensionError("contextual_coefficients: " + std::to_string(edge_features.rows()) + " edge feature rows for " +
                         std::to_string(graph.num_edges()) + " edges");
  }
  const DiffArray a = gather_rows(linear(layer.coef_subject, x), graph.dst);
  const DiffArray b = gather_rows(linear(layer.coef_object, x), graph.src);
  return matvec(mul(mul(a, b), edge_features), layer.coef_head);
}

DiffArray aggregate(const DiffArray& x, const NeighborGraph& graph, const DiffArray& alpha, const DiffArray& signs,
                    const ArtLayerParams& layer) {
  if (graph.num_edges() == 0) return DiffArray::zeros(x.shape());
  const DiffArray messages = relu(linear(layer.message, layer_norm(x, layer.message_norm)));
  const DiffArray weights = signs.defined() ? mul(alpha, signs) : alpha;
  return segment_sum(row_scale(gather_rows(messages, graph.src), weights), graph.dst_segment, graph.num_nodes);
}

ArtLayerOutput art_layer(const DiffArray& x, const NeighborGraph& graph, const DiffArray& edge_features,
                         const DiffArray& signs, const ArtLayerParams& layer) {
  ArtLayerOutput out;
  if (graph.num_edges() == 0) {
    out.coefficients = DiffArray::zeros({0});
    out.alpha = DiffArray::zeros({0});
  } else {
    out.coefficients = contextual_coefficients(x, graph, edge_features, layer);
    out.alpha = segment_softmax(out.coefficients, graph.dst_segment, graph.num_nodes);
  }
  const DiffArray z = add(x, aggregate(x, graph, out.alpha, signs, layer));
  out.next = add(z, ffn(layer.ffn, layer_norm(z, layer.ffn_norm)));
  return out;
}

DiffArray adaptive_filter(const std::vector<DiffArray>& layers, const DiffArray& gamma, const LayerNormParams& norm) {
  return layer_norm(weighted_sum(layers, gamma), norm);
}

DiffArray classify_logits(const DiffArray& x, const Linear& classifier) { return linear(classifier, x); }

ArtState art_forward(const DiffArray& x0, const NeighborGraph& graph, const DiffArray& edge_features,
                     const DiffArray& signs, const ArtParams& params) {
  ArtState state;
  DiffArray x = x0;
  for (const auto& layer : params.layers) {
    ArtLayerOutput out = art_layer(x, graph, edge_features, signs, layer);
    state.coefficients.push_back(out.coefficients);
    state.alpha.push_back(out.alpha);
    state.layers.push_back(out.next);
    x = out.next;
  }
  state.x_hat = adaptive_filter(state.layers, params.gamma, params.output_norm);
  state.logits = classify_logits(state.x_hat, params.classifier);
  state.probs = softmax(state.logits);
  return state;
}

}  // namespace hlnet
