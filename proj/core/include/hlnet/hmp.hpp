#pragma once

#include <string>
#include <vector>

#include "hlnet/art.hpp"
#include "hlnet/diff_array.hpp"
#include "hlnet/nn.hpp"
#include "hlnet/rfp.hpp"
#include "hlnet/scene.hpp"

namespace hlnet {

struct HmpParams {
  Linear node_hidden;         // W_s over [x_ij + B_ij, v_i, v_j]
  DiffArray node_head;        // w_s
  FusionParams edge_first;    // first fusion of the edge-sign chain
  FusionParams edge_second;   // second fusion
  DiffArray edge_head;        // w_q, shared by both neighbor cases
};

HmpParams make_hmp_params(ParamStore& store, const std::string& id, std::size_t width, int num_classes);

// s_ij = tanh(w_s^T ReLU(W_s [x_ij + B_ij, v_i, v_j])) for every neighbor edge
// (i <- j); `probs` holds one class distribution per node.
DiffArray node_signs(const DiffArray& edge_features, const DiffArray& probs, const NeighborGraph& graph,
                     const HmpParams& p);

// q = tanh(w_q^T ((a * b) * c)), one row per message. Shared subject rows use
// (x_hat_i, x_lj, x_ijl + B_{i,lj}); shared object rows use
// (x_im, x_hat_j, x_ijm + B_{im,j}).
DiffArray edge_signs(const DiffArray& a, const DiffArray& b, const DiffArray& c, const HmpParams& p);

// +1 when the edge's endpoints share a class, -1 otherwise.
std::vector<int> node_sign_labels(const SceneGraph& g, const NeighborGraph& graph);

struct EdgeSignTargets {
  std::vector<std::int64_t> messages;  // supervised message indices
  std::vector<int> labels;             // +1 same predicate, -1 different
};

// Only messages between two relationships that both carry a foreground
// target are supervised. `targets` is per pair, 0 = background.
EdgeSignTargets edge_sign_labels(const MessagePlan& plan, const std::vector<int>& targets);

}  // namespace hlnet
