#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlnet/art.hpp"
#include "hlnet/diff_array.hpp"
#include "hlnet/nn.hpp"
#include "hlnet/sampling.hpp"

namespace hlnet {

// x * y = ReLU(W_x x + W_y y) - (W_x x - W_y y)^2.
struct FusionParams {
  Linear left;   // W_x
  Linear right;  // W_y
};

FusionParams make_fusion(ParamStore& store, const std::string& id, std::size_t width);
DiffArray fuse(const DiffArray& x, const DiffArray& y, const FusionParams& p);

struct RfpParams {
  FusionParams fuse_nodes;    // x_hat_i * x_hat_j
  FusionParams fuse_context;  // (...) * (x_ij + B_ij)
  Linear hidden;              // W_r
  Linear scores;              // W_p, width -> C_rel + 1
};

RfpParams make_rfp_params(ParamStore& store, const std::string& id, std::size_t width, int num_predicates);

// r_ij = (x_hat_i * x_hat_j) * (x_ij + B_ij), one row per pair.
DiffArray relationship_features(const DiffArray& x_subject, const DiffArray& x_object, const DiffArray& context,
                                const RfpParams& p);
// p^0 = W_p ReLU(W_r r).
DiffArray init_scores(const DiffArray& r, const RfpParams& p);

enum class EdgeSignKind : std::uint8_t {
  SharedSubject,  // (i, l) -> (i, j), l in N_j
  SharedObject,   // (m, j) -> (i, j), m in N_i
};

// Index structure for messages between candidate relationships.
//
// For pair k = (i, j) the joint coefficient set lists the neighbor edges
// (j <- l), l in N_j, then (i <- m), m in N_i. A message entry exists for
// every member of that set whose relationship (i, l) or (m, j) is itself a
// candidate; other members only take part in the normalization.
struct MessagePlan {
  std::vector<NodePair> pairs;

  std::vector<std::int64_t> coef_edge;    // neighbor-graph edge per coefficient entry
  std::vector<std::uint32_t> coef_pair;   // owning pair per coefficient entry

  std::vector<std::int32_t> source;       // sending pair
  std::vector<std::uint32_t> target;      // receiving pair
  std::vector<std::int64_t> coef_entry;   // coefficient entry weighting the message
  std::vector<EdgeSignKind> kind;
  std::vector<std::size_t> third;         // l or m

  std::size_t num_pairs() const { return pairs.size(); }
  std::size_t num_messages() const { return source.size(); }
  // Pair index or -1.
  std::int32_t pair_index(std::size_t i, std::size_t j) const;

  std::size_t num_nodes = 0;
  std::vector<std::int32_t> pair_lookup;  // n*n table
};

MessagePlan build_message_plan(const NeighborGraph& graph, const std::vector<NodePair>& pairs);

// alpha_hat: softmax of the contextual coefficients over each pair's joint set.
DiffArray joint_coefficients(const DiffArray& coefficients, const MessagePlan& plan);

// Per-message weight alpha_hat * q; `signs` (per message) may be undefined.
DiffArray message_weights(const DiffArray& alpha_hat, const MessagePlan& plan, const DiffArray& signs);

// H = sum over messages of weight * p[source], accumulated per target pair.
DiffArray neighbor_messages(const DiffArray& scores, const MessagePlan& plan, const DiffArray& weights);

// p^{k+1} = beta (p^k + H^k) + (1 - beta) p^0, evaluated as
// p^0 + beta (p^k + H^k - p^0) so fixed points are kept exactly. Returns
// p^0..p^K. Throws NumericError on a non-finite step.
std::vector<DiffArray> propagate(const DiffArray& p0, const MessagePlan& plan, const DiffArray& weights, double beta,
                                 int steps);

// Logits p^K + f; the background column of f is zero.
DiffArray relationship_logits(const DiffArray& scores, const DiffArray& bias);

}  // namespace hlnet
