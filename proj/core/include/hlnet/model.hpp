#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hlnet/art.hpp"
#include "hlnet/diff_array.hpp"
#include "hlnet/freq_bias.hpp"
#include "hlnet/hmp.hpp"
#include "hlnet/nn.hpp"
#include "hlnet/rfp.hpp"
#include "hlnet/sampling.hpp"
#include "hlnet/scene.hpp"
#include "hlnet/spatial.hpp"

namespace hlnet {

struct ModelConfig {
  int num_object_classes = 10;
  int num_predicates = 6;
  int appearance_dim = 32;
  int width = 64;
  int ffn_hidden = 128;
  int layers = 5;       // U
  int steps = 4;        // K
  double tau = 0.5;
  double beta = -0.5;
  bool use_art = true;
  bool use_rfp = true;
  bool use_hmp = true;
  GammaMode gamma_init = GammaMode::HighPass;  // used when use_art is set

  // Mode actually used by the filter: the configured init with ART on, a fixed
  // last-layer readout with ART off.
  GammaMode effective_gamma_mode() const { return use_art ? gamma_init : GammaMode::LastLayer; }
  // Propagation steps actually run (0 with RFP off).
  int effective_steps() const { return use_rfp ? steps : 0; }

  void validate() const;
  std::map<std::string, std::string> to_key_values() const;
  // Applies recognized keys onto *this; returns the keys it did not recognize.
  std::vector<std::string> apply_key_values(const std::map<std::string, std::string>& kv);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Every learnable array plus the (fixed) frequency bias.
class Model {
 public:
  Model(const ModelConfig& cfg, FrequencyBias bias, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const FrequencyBias& frequency_bias() const { return bias_; }

  Linear node_projection;   // raw node features -> x^0
  Linear union_projection;  // union appearance -> x_ij, x_ijk
  SpatialEncoderParams spatial;
  ArtParams art;
  RfpParams rfp;
  HmpParams hmp;  // only populated with use_hmp

 private:
  ModelConfig cfg_;
  ParamStore store_;
  FrequencyBias bias_;
};

// Parameter-independent per-scene inputs, computed once and reused.
struct SceneInputs {
  const SceneGraph* scene = nullptr;
  NeighborGraph graph;
  DiffArray node_features;              // (n, F)
  DiffArray edge_union;                 // (A, d_app), union appearance per neighbor edge
  std::vector<SpatialMaps> edge_maps;   // per neighbor edge
  std::vector<int> node_labels;
  std::vector<int> node_sign_targets;   // per neighbor edge
};

SceneInputs prepare_scene(const SceneGraph& g);

enum class BiasClasses {
  GroundTruth,  // frequency bias keyed by labeled classes
  Predicted,    // keyed by argmax of v
};

struct SceneOutputs {
  DiffArray x0;
  DiffArray edge_features;  // x_ij + B_ij per neighbor edge
  DiffArray initial_probs;  // classifier on LN(x^0); feeds the node signs
  DiffArray node_signs;     // s per neighbor edge; undefined with HMP off
  ArtState art;

  std::vector<NodePair> pairs;
  MessagePlan plan;          // empty with RFP off
  DiffArray relation_features;
  DiffArray alpha_hat;
  DiffArray edge_signs;      // q per message; undefined with HMP or RFP off
  DiffArray message_weights;
  std::vector<DiffArray> scores;  // p^0..p^K
  std::vector<int> bias_classes;
  DiffArray relation_logits;  // p^K + f
  DiffArray relation_probs;   // t
};

SceneOutputs forward(const Model& model, const SceneInputs& inputs, const std::vector<NodePair>& pairs,
                     BiasClasses bias_classes);

struct LossTerms {
  DiffArray total;
  double node = 0.0;
  double edge = 0.0;
  double node_sign = 0.0;
  double edge_sign = 0.0;
};

// L = L_v + L_e + L_v_bce + L_e_bce; sign terms are zero with HMP off.
LossTerms total_loss(const Model& model, const SceneInputs& inputs, const SceneOutputs& out);

// Index of the largest entry; ties go to the smallest index.
std::size_t argmax(std::span<const double> v);

}  // namespace hlnet
