#include "hlnet/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>

#include "hlnet/errors.hpp"
#include "hlnet/features.hpp"
#include "hlnet/format.hpp"
#include "hlnet/ops.hpp"

namespace hlnet {

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (num_object_classes < 1 || num_predicates < 1 || appearance_dim < 1) fail("class counts and dims must be >= 1");
  if (width < 1 || ffn_hidden < 1) fail("width and ffn_hidden must be >= 1");
  if (layers < 1) fail("layers (U) must be >= 1");
  if (steps < 0) fail("steps (K) must be >= 0");
  if (!(tau > 0.0 && tau < 1.0)) fail("tau must lie in (0, 1)");
  if (!(std::abs(beta) < 1.0)) fail("beta must satisfy |beta| < 1");
}

std::map<std::string, std::string> ModelConfig::to_key_values() const {
  return {
      {"num_object_classes", std::to_string(num_object_classes)},
      {"num_predicates", std::to_string(num_predicates)},
      {"appearance_dim", std::to_string(appearance_dim)},
      {"width", std::to_string(width)},
      {"ffn_hidden", std::to_string(ffn_hidden)},
      {"layers", std::to_string(layers)},
      {"steps", std::to_string(steps)},
      {"tau", format_double(tau)},
      {"beta", format_double(beta)},
      {"art", use_art ? "1" : "0"},
      {"rfp", use_rfp ? "1" : "0"},
      {"hmp", use_hmp ? "1" : "0"},
      {"gamma_init", to_string(gamma_init)},
  };
}

std::vector<std::string> ModelConfig::apply_key_values(const std::map<std::string, std::string>& kv) {
  const std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"num_object_classes", [&](const std::string& v) { num_object_classes = parse_int(v); }},
      {"num_predicates", [&](const std::string& v) { num_predicates = parse_int(v); }},
      {"appearance_dim", [&](const std::string& v) { appearance_dim = parse_int(v); }},
      {"width", [&](const std::string& v) { width = parse_int(v); }},
      {"ffn_hidden", [&](const std::string& v) { ffn_hidden = parse_int(v); }},
      {"layers", [&](const std::string& v) { layers = parse_int(v); }},
      {"steps", [&](const std::string& v) { steps = parse_int(v); }},
      {"tau", [&](const std::string& v) { tau = parse_double(v); }},
      {"beta", [&](const std::string& v) { beta = parse_double(v); }},
      {"art", [&](const std::string& v) { use_art = parse_bool(v); }},
      {"rfp", [&](const std::string& v) { use_rfp = parse_bool(v); }},
      {"hmp", [&](const std::string& v) { use_hmp = parse_bool(v); }},
      {"gamma_init", [&](const std::string& v) { gamma_init = parse_gamma_mode(v); }},
  };
  std::vector<std::string> unknown;
  for (const auto& [k, v] : kv) {
    auto it = setters.find(k);
    if (it == setters.end()) {
      unknown.push_back(k);
    } else {
      it->second(v);
    }
  }
  return unknown;
}

Model::Model(const ModelConfig& cfg, FrequencyBias bias, std::uint64_t seed)
    : cfg_(cfg), store_(seed), bias_(std::move(bias)) {
  cfg_.validate();
  if (bias_.num_object_classes() != cfg.num_object_classes || bias_.num_predicates() != cfg.num_predicates) {
    throw ConfigError("frequency bias dimensions do not match the model");
  }
  if (cfg_.use_art && cfg_.gamma_init == GammaMode::LastLayer) {
    throw ConfigError("gamma_init must be high_pass or low_pass");
  }
  const auto d = static_cast<std::size_t>(cfg.width);
  node_projection = make_linear(
      store_, "input.node",
      node_feature_width(static_cast<std::size_t>(cfg.appearance_dim), static_cast<std::size_t>(cfg.num_object_classes)),
      d);
  union_projection = make_linear(store_, "input.union", static_cast<std::size_t>(cfg.appearance_dim), d);
  spatial = make_spatial_encoder(store_, "input.spatial", d);
  art = make_art_params(store_, "art", d, static_cast<std::size_t>(cfg.ffn_hidden), cfg.layers, cfg.num_object_classes,
                        cfg.tau, cfg_.effective_gamma_mode());
  rfp = make_rfp_params(store_, "rfp", d, cfg.num_predicates);
  if (cfg.use_hmp) hmp = make_hmp_params(store_, "hmp", d, cfg.num_object_classes);
}

SceneInputs prepare_scene(const SceneGraph& g) {
  SceneInputs in;
  in.scene = &g;
  in.graph = NeighborGraph::from_neighbors(g.neighbors);
  in.node_features = node_features(g);
  const std::size_t d_app = g.nodes.front().appearance.size();
  std::vector<double> unions;
  unions.reserve(in.graph.num_edges() * d_app);
  in.edge_maps.reserve(in.graph.num_edges());
  for (std::size_t e = 0; e < in.graph.num_edges(); ++e) {
    const auto i = static_cast<std::size_t>(in.graph.dst[e]);
    const auto j = static_cast<std::size_t>(in.graph.src[e]);
    const std::array<std::size_t, 2> ids{i, j};
    const auto u = union_appearance(g, ids);
    unions.insert(unions.end(), u.begin(), u.end());
    in.edge_maps.push_back(spatial_binary_maps(g.nodes[i].box, g.nodes[j].box));
  }
  in.edge_union = DiffArray::constant({in.graph.num_edges(), d_app}, std::move(unions));
  for (const auto& n : g.nodes) in.node_labels.push_back(n.class_label);
  in.node_sign_targets = node_sign_labels(g, in.graph);
  return in;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

namespace {

// Builds the three inputs of the edge-sign chain for every message, sharing
// union appearances and spatial encodings between messages that need the
// same region.
struct EdgeSignInputs {
  DiffArray a, b, c;
};

EdgeSignInputs edge_sign_inputs(const Model& model, const SceneInputs& in, const MessagePlan& plan,
                                const DiffArray& x_hat) {
  const SceneGraph& g = *in.scene;
  const std::size_t m = plan.num_messages();
  const std::size_t d_app = g.nodes.front().appearance.size();

  std::map<std::pair<std::size_t, std::size_t>, std::int32_t> pair_rows;  // unordered node pair -> row
  std::vector<double> pair_values;
  auto pair_row = [&](std::size_t u, std::size_t v) {
    const auto key = std::minmax(u, v);
    auto [it, fresh] = pair_rows.try_emplace({key.first, key.second}, static_cast<std::int32_t>(pair_rows.size()));
    if (fresh) {
      const std::array<std::size_t, 2> ids{key.first, key.second};
      const auto a = union_appearance(g, ids);
      pair_values.insert(pair_values.end(), a.begin(), a.end());
    }
    return it->second;
  };
  std::map<std::array<std::size_t, 3>, std::int32_t> triple_rows;
  std::vector<double> triple_values;
  auto triple_row = [&](std::size_t u, std::size_t v, std::size_t w) {
    std::array<std::size_t, 3> key{u, v, w};
    std::sort(key.begin(), key.end());
    auto [it, fresh] = triple_rows.try_emplace(key, static_cast<std::int32_t>(triple_rows.size()));
    if (fresh) {
      const auto a = union_appearance(g, key);
      triple_values.insert(triple_values.end(), a.begin(), a.end());
    }
    return it->second;
  };
  // Spatial layouts: (kind, single node, unordered pair) -> row.
  std::map<std::array<std::size_t, 4>, std::int32_t> map_rows;
  std::vector<double> map_values;
  auto map_row = [&](EdgeSignKind kind, std::size_t single, std::size_t u, std::size_t v) {
    const auto key_pair = std::minmax(u, v);
    const std::array<std::size_t, 4> key{static_cast<std::size_t>(kind), single, key_pair.first, key_pair.second};
    auto [it, fresh] = map_rows.try_emplace(key, static_cast<std::int32_t>(map_rows.size()));
    if (fresh) {
      const Box merged = union_box(g.nodes[u].box, g.nodes[v].box);
      const Box& alone = g.nodes[single].box;
      const auto maps = kind == EdgeSignKind::SharedSubject ? spatial_binary_maps(alone, merged)
                                                            : spatial_binary_maps(merged, alone);
      map_values.insert(map_values.end(), maps.begin(), maps.end());
    }
    return it->second;
  };

  std::vector<std::int32_t> a_node(m, -1), a_pair(m, -1), b_node(m, -1), b_pair(m, -1), c_triple(m), c_map(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto [i, j] = plan.pairs[plan.target[k]];
    const std::size_t t = plan.third[k];
    c_triple[k] = triple_row(i, j, t);
    if (plan.kind[k] == EdgeSignKind::SharedSubject) {
      // (x_hat_i, x_lj, x_ijl + B_{i,lj})
      a_node[k] = static_cast<std::int32_t>(i);
      b_pair[k] = pair_row(t, j);
      c_map[k] = map_row(EdgeSignKind::SharedSubject, i, t, j);
    } else {
      // (x_im, x_hat_j, x_ijm + B_{im,j})
      a_pair[k] = pair_row(i, t);
      b_node[k] = static_cast<std::int32_t>(j);
      c_map[k] = map_row(EdgeSignKind::SharedObject, j, i, t);
    }
  }
  const DiffArray pairs_proj =
      linear(model.union_projection, DiffArray::constant({pair_rows.size(), d_app}, std::move(pair_values)));
  const DiffArray triples_proj =
      linear(model.union_projection, DiffArray::constant({triple_rows.size(), d_app}, std::move(triple_values)));
  const DiffArray layouts = encode_spatial(std::span<const double>(map_values), model.spatial);

  EdgeSignInputs out;
  out.a = add(gather_rows(x_hat, a_node), gather_rows(pairs_proj, a_pair));
  out.b = add(gather_rows(x_hat, b_node), gather_rows(pairs_proj, b_pair));
  out.c = add(gather_rows(triples_proj, c_triple), gather_rows(layouts, c_map));
  return out;
}

}  // namespace

SceneOutputs forward(const Model& model, const SceneInputs& in, const std::vector<NodePair>& pairs,
                     BiasClasses bias_classes) {
  const ModelConfig& cfg = model.config();
  const SceneGraph& g = *in.scene;
  const std::size_t n = g.nodes.size();
  const auto d = static_cast<std::size_t>(cfg.width);
  SceneOutputs out;
  out.pairs = pairs;

  out.x0 = node_input(in.node_features, model.node_projection);
  if (in.graph.num_edges() > 0) {
    out.edge_features = add(linear(model.union_projection, in.edge_union),
                            encode_spatial(std::span<const SpatialMaps>(in.edge_maps), model.spatial));
  } else {
    out.edge_features = DiffArray::zeros({0, d});
  }
  if (cfg.use_hmp) {
    out.initial_probs = softmax(classify_logits(layer_norm(out.x0, model.art.input_norm), model.art.classifier));
    out.node_signs = node_signs(out.edge_features, out.initial_probs, in.graph, model.hmp);
  }
  out.art = art_forward(out.x0, in.graph, out.edge_features, out.node_signs, model.art);

  if (bias_classes == BiasClasses::GroundTruth) {
    out.bias_classes = in.node_labels;
  } else {
    const auto probs = out.art.probs.values();
    const auto c = static_cast<std::size_t>(cfg.num_object_classes);
    for (std::size_t i = 0; i < n; ++i) {
      out.bias_classes.push_back(static_cast<int>(argmax(probs.subspan(i * c, c))));
    }
  }
  if (pairs.empty()) return out;

  std::vector<std::int32_t> subj, obj, edge_of_pair;
  for (const auto& [i, j] : pairs) {
    const std::int64_t e = in.graph.find(i, j);
    if (e < 0) {
      throw ContractError("candidate pair (" + std::to_string(i) + ", " + std::to_string(j) + ") is not a neighbor edge");
    }
    subj.push_back(static_cast<std::int32_t>(i));
    obj.push_back(static_cast<std::int32_t>(j));
    edge_of_pair.push_back(static_cast<std::int32_t>(e));
  }
  const DiffArray& x_hat = out.art.x_hat;
  out.relation_features = relationship_features(gather_rows(x_hat, subj), gather_rows(x_hat, obj),
                                                gather_rows(out.edge_features, edge_of_pair), model.rfp);
  const DiffArray p0 = init_scores(out.relation_features, model.rfp);

  if (cfg.use_rfp) {
    out.plan = build_message_plan(in.graph, pairs);
    out.alpha_hat = joint_coefficients(out.art.coefficients.back(), out.plan);
    if (cfg.use_hmp && out.plan.num_messages() > 0) {
      const EdgeSignInputs q_in = edge_sign_inputs(model, in, out.plan, x_hat);
      out.edge_signs = edge_signs(q_in.a, q_in.b, q_in.c, model.hmp);
    }
    out.message_weights = message_weights(out.alpha_hat, out.plan, out.edge_signs);
    out.scores = propagate(p0, out.plan, out.message_weights, cfg.beta, cfg.effective_steps());
  } else {
    out.scores = {p0};
  }

  const std::size_t width = static_cast<std::size_t>(cfg.num_predicates) + 1;
  std::vector<double> bias;
  bias.reserve(pairs.size() * width);
  for (const auto& [i, j] : pairs) {
    const auto row = model.frequency_bias().logits_with_background(out.bias_classes[i], out.bias_classes[j]);
    bias.insert(bias.end(), row.begin(), row.end());
  }
  out.relation_logits = relationship_logits(out.scores.back(), DiffArray::constant({pairs.size(), width}, std::move(bias)));
  out.relation_probs = softmax(out.relation_logits);
  return out;
}

LossTerms total_loss(const Model& model, const SceneInputs& in, const SceneOutputs& out) {
  const ModelConfig& cfg = model.config();
  LossTerms terms;
  DiffArray total = cross_entropy(out.art.logits, in.node_labels);
  terms.node = total.item();
  if (!out.pairs.empty()) {
    const DiffArray le = cross_entropy(out.relation_logits, pair_targets(*in.scene, out.pairs));
    terms.edge = le.item();
    total = add(total, le);
  }
  if (cfg.use_hmp && out.node_signs.defined() && out.node_signs.size() > 0) {
    const DiffArray lb = sign_bce(out.node_signs, in.node_sign_targets);
    terms.node_sign = lb.item();
    total = add(total, lb);
  }
  if (cfg.use_hmp && out.edge_signs.defined()) {
    const EdgeSignTargets targets = edge_sign_labels(out.plan, pair_targets(*in.scene, out.pairs));
    if (!targets.messages.empty()) {
      const DiffArray picked = gather_flat(out.edge_signs, targets.messages, {targets.messages.size()});
      const DiffArray lb = sign_bce(picked, targets.labels);
      terms.edge_sign = lb.item();
      total = add(total, lb);
    }
  }
  if (!std::isfinite(total.item())) throw NumericError("total loss is not finite");
  terms.total = total;
  return terms;
}

}  // namespace hlnet
