#include "hlnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hlnet/errors.hpp"
#include "hlnet/format.hpp"
#include "hlnet/freq_bias.hpp"
#include "hlnet/generator.hpp"
#include "hlnet/optim.hpp"
#include "hlnet/sampling.hpp"

namespace hlnet {

namespace {

constexpr double kDivergenceLimit = 1e6;

// Distinct streams derived from the run seed.
enum Stream : std::uint64_t { kInit = 1, kOrder = 2, kPairs = 3 };

std::uint64_t stream_seed(std::uint64_t seed, Stream s, std::uint64_t a = 0, std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(seed * 4 + s) + a) + b);
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (sample_ratio < 0) throw ConfigError("sample_ratio must be >= 0");
  if (!(clip_norm >= 0.0) || !std::isfinite(clip_norm)) throw ConfigError("clip_norm must be >= 0");
}

std::map<std::string, std::string> TrainConfig::to_key_values() const {
  auto kv = model.to_key_values();
  kv["epochs"] = std::to_string(epochs);
  kv["lr"] = format_double(learning_rate);
  kv["momentum"] = format_double(momentum);
  kv["seed"] = std::to_string(seed);
  kv["task"] = to_string(task);
  kv["sample_ratio"] = std::to_string(sample_ratio);
  kv["clip_norm"] = format_double(clip_norm);
  return kv;
}

std::vector<std::string> TrainConfig::apply_key_values(const std::map<std::string, std::string>& kv) {
  std::vector<std::string> unknown;
  for (const auto& key : model.apply_key_values(kv)) {
    const std::string& v = kv.at(key);
    if (key == "epochs") {
      epochs = parse_int(v);
    } else if (key == "lr") {
      learning_rate = parse_double(v);
    } else if (key == "momentum") {
      momentum = parse_double(v);
    } else if (key == "seed") {
      seed = parse_uint64(v);
    } else if (key == "task") {
      task = parse_task(v);
    } else if (key == "sample_ratio") {
      sample_ratio = parse_int(v);
    } else if (key == "clip_norm") {
      clip_norm = parse_double(v);
    } else {
      unknown.push_back(key);
    }
  }
  return unknown;
}

std::vector<EpochLog> train_model(Model& model, const Corpus& corpus, const TrainConfig& cfg,
                                  const EpochCallback& on_epoch) {
  cfg.validate();
  std::vector<SceneInputs> inputs;
  inputs.reserve(corpus.train.size());
  for (const auto& g : corpus.train) inputs.push_back(prepare_scene(g));

  OptimizerState opt = make_optimizer_state(model.params(), cfg.learning_rate, cfg.momentum);
  std::vector<EpochLog> log;
  std::vector<std::size_t> order(inputs.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(stream_seed(cfg.seed, kOrder, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    for (std::size_t idx : order) {
      const SceneInputs& in = inputs[idx];
      const auto pairs = sample_pairs(*in.scene, cfg.sample_ratio,
                                      stream_seed(cfg.seed, kPairs, static_cast<std::uint64_t>(epoch), idx));
      model.params().zero_grad();
      const SceneOutputs out = forward(model, in, pairs, BiasClasses::GroundTruth);
      const LossTerms loss = total_loss(model, in, out);
      const double value = loss.total.item();
      if (!std::isfinite(value) || value > kDivergenceLimit) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", scene " + std::to_string(idx) +
                           ": loss " + format_double(value));
      }
      loss.total.backward();
      if (cfg.clip_norm > 0.0) clip_grad_norm(model.params(), cfg.clip_norm);
      sgd_momentum_step(opt, model.params());
      loss_sum += value;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = inputs.empty() ? 0.0 : loss_sum / static_cast<double>(inputs.size());
    const MetricsReport val = evaluate(model, corpus.val, cfg.task);
    entry.val_node_accuracy = val.node_accuracy;
    entry.val_recall50 = val.recall[1];
    log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return log;
}

TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  FrequencyBias bias = build_frequency_bias(corpus.train, cfg.model.num_object_classes, cfg.model.num_predicates);
  TrainResult result{Model(cfg.model, std::move(bias), stream_seed(cfg.seed, kInit)), {}};
  result.log = train_model(result.model, corpus, cfg, on_epoch);
  return result;
}

PredictionSet predict(const Model& model, const SceneInputs& inputs, Task task) {
  NoGradGuard no_grad;
  const SceneGraph& g = *inputs.scene;
  const auto pairs = all_pairs(g);
  const SceneOutputs out =
      forward(model, inputs, pairs, task == Task::PredCls ? BiasClasses::GroundTruth : BiasClasses::Predicted);

  PredictionSet pred;
  const auto c = static_cast<std::size_t>(model.config().num_object_classes);
  const auto probs = out.art.probs.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (task == Task::PredCls) {
      pred.node_classes.push_back(g.nodes[i].class_label);
      pred.node_scores.push_back(1.0);
    } else {
      const auto row = probs.subspan(i * c, c);
      const std::size_t k = argmax(row);
      pred.node_classes.push_back(static_cast<int>(k));
      pred.node_scores.push_back(row[k]);
    }
  }
  if (pairs.empty()) return pred;
  const auto width = static_cast<std::size_t>(model.config().num_predicates) + 1;
  const auto t = out.relation_probs.values();
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto row = t.subspan(e * width + 1, width - 1);  // skip background
    const std::size_t p = argmax(row);
    const auto [i, j] = pairs[e];
    pred.triplets.push_back({i, j, static_cast<int>(p), pred.node_scores[i] * pred.node_scores[j] * row[p]});
  }
  rank_triplets(pred.triplets);
  return pred;
}

std::vector<PredictionSet> predict_all(const Model& model, const std::vector<SceneGraph>& scenes, Task task) {
  std::vector<PredictionSet> preds;
  preds.reserve(scenes.size());
  for (const auto& g : scenes) preds.push_back(predict(model, prepare_scene(g), task));
  return preds;
}

MetricsReport evaluate(const Model& model, const std::vector<SceneGraph>& scenes, Task task) {
  return compute_metrics(task, predict_all(model, scenes, task), scenes);
}

namespace {

GridResult run_cell(const Corpus& corpus, const TrainConfig& cfg, std::string label) {
  const TrainResult trained = train(corpus, cfg);
  GridResult r;
  r.label = std::move(label);
  r.seed = cfg.seed;
  r.config = cfg;
  r.sgcls = evaluate(trained.model, corpus.test, Task::SgCls);
  r.predcls = evaluate(trained.model, corpus.test, Task::PredCls);
  return r;
}

}  // namespace

std::vector<GridResult> ablation_run(const Corpus& corpus, const TrainConfig& base,
                                     const std::vector<std::uint64_t>& seeds) {
  std::vector<GridResult> results;
  for (const auto& row : kAblationGrid) {
    TrainConfig cfg = base;
    cfg.model.use_art = row.art;
    cfg.model.use_rfp = row.rfp;
    cfg.model.use_hmp = row.hmp;
    for (auto seed : seeds) {
      cfg.seed = seed;
      results.push_back(run_cell(corpus, cfg, "exp" + std::to_string(row.experiment)));
    }
  }
  return results;
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Tau:
      return "tau";
    case SweepParam::Layers:
      return "layers";
    case SweepParam::Steps:
      return "steps";
  }
  return "?";
}

SweepParam parse_sweep_param(const std::string& s) {
  if (s == "tau") return SweepParam::Tau;
  if (s == "layers") return SweepParam::Layers;
  if (s == "steps") return SweepParam::Steps;
  throw ConfigError("unknown sweep parameter '" + s + "' (expected tau, layers or steps)");
}

std::vector<double> sweep_values(SweepParam p) {
  if (p == SweepParam::Tau) return {0.2, 0.5, 0.7};
  return {2, 3, 4, 5};
}

TrainConfig with_sweep_value(TrainConfig cfg, SweepParam p, double value) {
  switch (p) {
    case SweepParam::Tau:
      cfg.model.tau = value;
      break;
    case SweepParam::Layers:
      cfg.model.layers = static_cast<int>(value);
      break;
    case SweepParam::Steps:
      cfg.model.steps = static_cast<int>(value);
      break;
  }
  return cfg;
}

std::vector<GridResult> sweep_run(const Corpus& corpus, const TrainConfig& base, SweepParam param,
                                  const std::vector<std::uint64_t>& seeds) {
  std::vector<GridResult> results;
  for (double value : sweep_values(param)) {
    TrainConfig cfg = with_sweep_value(base, param, value);
    for (auto seed : seeds) {
      cfg.seed = seed;
      results.push_back(run_cell(corpus, cfg, to_string(param) + "=" + format_double(value)));
    }
  }
  return results;
}

}  // namespace hlnet
