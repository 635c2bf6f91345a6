#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlnet/diff_array.hpp"
#include "hlnet/nn.hpp"
#include "hlnet/scene.hpp"

namespace hlnet {

// Directed neighbor edges (dst <- src), one per j in N_i, grouped by
// destination in ascending order.
struct NeighborGraph {
  std::size_t num_nodes = 0;
  std::vector<std::int32_t> dst;
  std::vector<std::int32_t> src;
  std::vector<std::uint32_t> dst_segment;  // dst as segment ids

  std::size_t num_edges() const { return dst.size(); }
  // Edge index of (i <- j), or -1.
  std::int64_t find(std::size_t i, std::size_t j) const;

  static NeighborGraph from_neighbors(const std::vector<std::vector<std::size_t>>& neighbors);

 private:
  std::vector<std::int64_t> lookup_;  // n*n table
};

// How the layer-mixing weights are set up.
enum class GammaMode {
  HighPass,   // learnable, alternating-sign initialization
  LowPass,    // learnable, initialized to |high-pass init|
  LastLayer,  // fixed one-hot on the last layer; plain stacked aggregation
};

std::string to_string(GammaMode mode);
GammaMode parse_gamma_mode(const std::string& s);

// gamma_u = (-tau)^(u-1) / sum_u' |(-tau)^(u'-1)|, u = 1..U.
std::vector<double> init_gamma(double tau, int layers);

struct ArtLayerParams {
  Linear coef_subject;  // W_c1
  Linear coef_object;   // W_c2
  DiffArray coef_head;  // w_c
  Linear message;       // W_F
  LayerNormParams message_norm;
  LayerNormParams ffn_norm;
  FfnParams ffn;
};

struct ArtParams {
  std::vector<ArtLayerParams> layers;
  DiffArray gamma;  // learnable unless mode == LastLayer
  GammaMode gamma_mode = GammaMode::HighPass;
  LayerNormParams output_norm;
  LayerNormParams input_norm;  // feeds the classifier on x^0 for the node signs
  Linear classifier;           // W_v

  std::size_t num_layers() const { return layers.size(); }
};

ArtParams make_art_params(ParamStore& store, const std::string& id, std::size_t width, std::size_t ffn_hidden,
                          int layers, int num_classes, double tau, GammaMode mode);

// c over every edge: w_c^T (W_c1 x_dst * W_c2 x_src * edge_features[e]),
// where edge_features already holds x_ij + B_ij.
DiffArray contextual_coefficients(const DiffArray& x, const NeighborGraph& graph, const DiffArray& edge_features,
                                  const ArtLayerParams& layer);

// F(N_i) = sum_j s_ij alpha_ij ReLU(W_F LN(x_j)); `signs` may be undefined
// (all ones). Nodes without neighbors receive zeros.
DiffArray aggregate(const DiffArray& x, const NeighborGraph& graph, const DiffArray& alpha, const DiffArray& signs,
                    const ArtLayerParams& layer);

struct ArtLayerOutput {
  DiffArray coefficients;  // c, per edge
  DiffArray alpha;         // softmax of c per destination
  DiffArray next;          // x^{u+1}
};

// z = x + F(N_i); x' = z + FFN(LN(z)).
ArtLayerOutput art_layer(const DiffArray& x, const NeighborGraph& graph, const DiffArray& edge_features,
                         const DiffArray& signs, const ArtLayerParams& layer);

struct ArtState {
  std::vector<DiffArray> layers;        // x^1..x^U
  std::vector<DiffArray> coefficients;  // c per layer
  std::vector<DiffArray> alpha;         // alpha per layer
  DiffArray x_hat;
  DiffArray logits;  // W_v x_hat
  DiffArray probs;   // v
};

ArtState art_forward(const DiffArray& x0, const NeighborGraph& graph, const DiffArray& edge_features,
                     const DiffArray& signs, const ArtParams& params);

// x_hat = LN(sum_u gamma_u x^u).
DiffArray adaptive_filter(const std::vector<DiffArray>& layers, const DiffArray& gamma, const LayerNormParams& norm);

// Classifier logits W_v x + b; softmax gives v.
DiffArray classify_logits(const DiffArray& x, const Linear& classifier);

}  // namespace hlnet
