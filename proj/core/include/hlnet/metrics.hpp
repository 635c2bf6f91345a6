#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hlnet/scene.hpp"

namespace hlnet {

enum class Task { PredCls, SgCls };

std::string to_string(Task task);
Task parse_task(std::string_view s);

struct ScoredTriplet {
  std::size_t subject = 0;
  std::size_t object = 0;
  int predicate = 0;
  double score = 0.0;

  friend bool operator==(const ScoredTriplet&, const ScoredTriplet&) = default;
};

// Output for one scene: predicted node classes and ranked triplets.
struct PredictionSet {
  std::vector<int> node_classes;
  std::vector<double> node_scores;
  std::vector<ScoredTriplet> triplets;  // sorted by rank_before

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

// Higher score first; ties by (subject, object, predicate) ascending.
bool rank_before(const ScoredTriplet& a, const ScoredTriplet& b);
void rank_triplets(std::vector<ScoredTriplet>& triplets);

// Whether predicted triplet `t` (boxes taken from the scene, classes from
// `pred`) hits ground-truth triplet `gt` with IoU >= 0.5 per box.
bool triplet_matches(const PredictionSet& pred, const ScoredTriplet& t, const SceneGraph& g, const Triplet& gt);
// Same with the union of subject and object boxes compared as one box.
bool phrase_matches(const PredictionSet& pred, const ScoredTriplet& t, const SceneGraph& g, const Triplet& gt);

// For each gt triplet, whether a top-K prediction claimed it (greedy in rank
// order; each gt is claimed at most once).
std::vector<bool> matched_gt(const PredictionSet& pred, const SceneGraph& g, std::size_t k);

// Scene recall in [0, 1]; nullopt for a scene without gt triplets.
std::optional<double> recall_at_k(const PredictionSet& pred, const SceneGraph& g, std::size_t k);

// Mean of scene recalls over scenes that have gt; nullopt when none does.
std::optional<double> corpus_recall_at_k(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes,
                                         std::size_t k);

// Per predicate: mean recall over scenes containing it; then the mean over
// predicates present in the gt.
std::optional<double> mean_recall_at_k(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes,
                                       std::size_t k);

struct OcclusionSplit {
  std::optional<double> occluded;  // C: an endpoint has IoU > 0.5 with another node
  std::optional<double> clear;     // S: the rest
};

OcclusionSplit occlusion_split_recall(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes,
                                      std::size_t k);

enum class ApMode { Relation, Phrase };

// Average precision of one predicate from a ranked TP/FP sequence with
// `positives` ground truths: area under the monotone precision envelope.
// With `scores`, tied detections form one PR point, so the result does not
// depend on their relative order.
double average_precision(const std::vector<bool>& hits, std::size_t positives, const std::vector<double>& scores = {});

// sum_p w_p AP_p with w_p the share of gt triplets carrying predicate p.
std::optional<double> wmap(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes, ApMode mode);

// 0.2 R@50 + 0.4 wmAP_rel + 0.4 wmAP_phr, percent scale in and out.
double score_wtd(double r50, double wmap_rel, double wmap_phr);

// Share of nodes whose predicted class equals the label.
std::optional<double> node_accuracy(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes);

inline constexpr std::array<std::size_t, 3> kRecallKs = {20, 50, 100};

// Percent-scale summary for one task. Undefined entries are NaN.
struct MetricsReport {
  Task task = Task::SgCls;
  std::array<double, 3> recall{};       // R@20/50/100
  std::array<double, 3> mean_recall{};  // mR@20/50/100
  std::array<double, 3> occluded_recall{};
  std::array<double, 3> clear_recall{};
  double wmap_rel = 0.0;
  double wmap_phr = 0.0;
  double score = 0.0;  // score_wtd
  double node_accuracy = 0.0;
  double homophily = 0.0;  // fraction, not percent

  // Equality treats NaN as equal to NaN.
  bool operator==(const MetricsReport& other) const;
};

MetricsReport compute_metrics(Task task, const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes);

// `metric,task,K,value` rows; K is "-" for metrics without a cutoff.
std::string metrics_csv(const std::vector<MetricsReport>& reports);
std::vector<MetricsReport> parse_metrics_csv(std::string_view text);
// Aligned text table, one decimal.
std::string metrics_table(const std::vector<MetricsReport>& reports);

}  // namespace hlnet
