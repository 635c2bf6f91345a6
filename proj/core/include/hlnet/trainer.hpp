#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hlnet/metrics.hpp"
#include "hlnet/model.hpp"
#include "hlnet/scene.hpp"

namespace hlnet {

struct TrainConfig {
  ModelConfig model;
  int epochs = 30;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  Task task = Task::SgCls;
  int sample_ratio = 3;  // background pairs per gt pair
  double clip_norm = 5.0;  // global gradient norm cap; 0 disables

  void validate() const;
  // Model keys plus epochs, lr, momentum, seed, task, sample_ratio, clip_norm.
  std::map<std::string, std::string> to_key_values() const;
  std::vector<std::string> apply_key_values(const std::map<std::string, std::string>& kv);

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;  // mean total loss over training scenes
  double val_node_accuracy = 0.0;  // percent; NaN without val scenes
  double val_recall50 = 0.0;       // percent, in the configured task

  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Builds the model (frequency bias from the train split) and runs SGD with
// momentum, one step per scene. Bitwise deterministic in (corpus, cfg).
// Throws NumericError when the loss exceeds 1e6 or stops being finite.
TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Trains an existing model for cfg.epochs more epochs; the model config in
// `cfg` is ignored.
std::vector<EpochLog> train_model(Model& model, const Corpus& corpus, const TrainConfig& cfg,
                                  const EpochCallback& on_epoch = {});

// All ordered node pairs are candidates. PREDCLS substitutes labeled classes
// with score 1; SGCLS takes argmax v with the smallest class winning ties.
PredictionSet predict(const Model& model, const SceneInputs& inputs, Task task);
std::vector<PredictionSet> predict_all(const Model& model, const std::vector<SceneGraph>& scenes, Task task);

MetricsReport evaluate(const Model& model, const std::vector<SceneGraph>& scenes, Task task);

// Module toggles of one ablation experiment.
struct AblationRow {
  int experiment = 0;  // 1..8
  bool art = false;
  bool rfp = false;
  bool hmp = false;
};

// Ordered like the published ablation table.
inline constexpr std::array<AblationRow, 8> kAblationGrid = {{
    {1, false, false, false},
    {2, true, false, false},
    {3, false, true, false},
    {4, false, false, true},
    {5, true, true, false},
    {6, false, true, true},
    {7, true, false, true},
    {8, true, true, true},
}};

struct GridResult {
  std::string label;  // "exp3", "tau=0.5", ...
  std::uint64_t seed = 0;
  TrainConfig config;
  MetricsReport sgcls;
  MetricsReport predcls;
};

// Trains every ablation row once per seed; results are row-major
// (row, then seed). Evaluation uses the test split.
std::vector<GridResult> ablation_run(const Corpus& corpus, const TrainConfig& base, const std::vector<std::uint64_t>& seeds);

enum class SweepParam { Tau, Layers, Steps };

std::string to_string(SweepParam p);
SweepParam parse_sweep_param(const std::string& s);
// tau {0.2, 0.5, 0.7}; U and K {2, 3, 4, 5}.
std::vector<double> sweep_values(SweepParam p);
TrainConfig with_sweep_value(TrainConfig cfg, SweepParam p, double value);

std::vector<GridResult> sweep_run(const Corpus& corpus, const TrainConfig& base, SweepParam param,
                                  const std::vector<std::uint64_t>& seeds);

}  // namespace hlnet
