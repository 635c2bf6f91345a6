#include "hlnet_cli/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hlnet/checkpoint.hpp"
#include "hlnet/corpus_io.hpp"
#include "hlnet/errors.hpp"
#include "hlnet/format.hpp"
#include "hlnet/generator.hpp"
#include "hlnet/io.hpp"
#include "hlnet/metrics.hpp"
#include "hlnet/trainer.hpp"
#include "hlnet_cli/manifest.hpp"
#include "hlnet_cli/report.hpp"

namespace hlnet::cli {

namespace {

namespace fs = std::filesystem;
using KeyValues = std::map<std::string, std::string>;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string config;
};

// Flags that stand for config keys. Only flags given on the command line end
// up in `values`, so they override the config file and nothing else.
class KeyFlags {
 public:
  CLI::Option* value(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    return app->add_option_function<std::string>(flag, [this, key](const std::string& v) { values_[key] = v; }, help);
  }
  void set(CLI::App* app, const std::string& flag, const std::string& key, const std::string& fixed,
           const std::string& help) {
    app->add_flag_callback(flag, [this, key, fixed] { values_[key] = fixed; }, help);
  }
  const KeyValues& values() const { return values_; }

 private:
  KeyValues values_;
};

fs::path resolve(const Globals& g, const std::string& p) { return fs::path(g.out_dir) / p; }

// Config file entries, then flag entries on top.
KeyValues merged(const Globals& g, const KeyFlags& flags) {
  KeyValues kv;
  if (!g.config.empty()) kv = parse_key_values(read_file(resolve(g, g.config)));
  for (const auto& [k, v] : flags.values()) kv[k] = v;
  if (g.seed) kv["seed"] = std::to_string(*g.seed);
  return kv;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

TrainConfig train_config(const Globals& g, const KeyFlags& flags, const GenConfig& corpus_cfg) {
  TrainConfig cfg;
  const auto unknown = cfg.apply_key_values(merged(g, flags));
  if (!unknown.empty()) throw ConfigError("unknown training keys: " + join(unknown));
  cfg.model.num_object_classes = corpus_cfg.num_object_classes;
  cfg.model.num_predicates = corpus_cfg.num_predicates;
  cfg.model.appearance_dim = corpus_cfg.appearance_dim;
  cfg.validate();
  return cfg;
}

void add_train_flags(CLI::App* app, KeyFlags& flags) {
  flags.value(app, "--task", "task", "predcls or sgcls (default sgcls)");
  flags.value(app, "--epochs", "epochs", "training epochs (default 30)");
  flags.value(app, "--lr", "lr", "SGD learning rate (default 1e-3)");
  flags.value(app, "--momentum", "momentum", "SGD momentum (default 0.9)");
  flags.value(app, "--width", "width", "hidden width d (default 64)");
  flags.value(app, "--ffn-hidden", "ffn_hidden", "feed-forward hidden size (default 128)");
  flags.value(app, "--tau", "tau", "filter initialization tau (default 0.5)");
  flags.value(app, "--layers", "layers", "transformer layers U (default 5)");
  flags.value(app, "--steps", "steps", "propagation steps K (default 4)");
  flags.value(app, "--beta", "beta", "teleport probability, |beta| < 1 (default -0.5)");
  flags.value(app, "--gamma-init", "gamma_init", "high_pass, low_pass or last_layer (default high_pass)");
  flags.value(app, "--sample-ratio", "sample_ratio", "background pairs per labeled pair (default 3)");
  flags.value(app, "--clip-norm", "clip_norm", "gradient norm cap, 0 disables (default 5)");
  flags.set(app, "--no-art", "art", "0", "disable the adaptive transformer");
  flags.set(app, "--no-rfp", "rfp", "0", "disable relationship propagation");
  flags.set(app, "--no-hmp", "hmp", "0", "disable sign-gated message passing");
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, int count) {
  if (count < 1) throw ConfigError("--seeds must be at least 1, got " + std::to_string(count));
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(first + static_cast<std::uint64_t>(i));
  return seeds;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double sgcls_r50(const GridResult& r) { return r.sgcls.recall[1]; }
double predcls_r50(const GridResult& r) { return r.predcls.recall[1]; }

std::string grid_summary(const std::vector<GridResult>& rows) {
  const auto sg = mean_by_label(rows, sgcls_r50);
  const auto pc = mean_by_label(rows, predcls_r50);
  auto right = [](std::string s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
  std::string out = "label         SGCLS R@50  PREDCLS R@50\n";
  for (std::size_t i = 0; i < sg.size(); ++i) {
    std::string label = sg[i].label;
    label.resize(std::max<std::size_t>(label.size(), 12), ' ');
    out += label + right(format_fixed(sg[i].mean, 1), 12) + right(format_fixed(pc[i].mean, 1), 14) + "\n";
  }
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterophily-aware scene-graph generation on a synthetic corpus"};
  app.name("hlnet-cli");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { g.seed = s; }, "random seed (default 0)");
  app.add_option("--out-dir", g.out_dir, "directory all paths are relative to")->capture_default_str();
  app.add_option("--config", g.config, "key=value file; flags override its entries");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  KeyFlags gen_flags;
  std::string gen_dir = "corpus";
  gen_flags.value(gen, "--homophily", "homophily", "target corpus homophily in [0, 1] (default 0.2)")
      ->check(CLI::Range(0.0, 1.0));
  gen_flags.value(gen, "--scenes", "train_scenes", "training scenes (default 500)")->check(CLI::PositiveNumber);
  gen_flags.value(gen, "--val-scenes", "val_scenes", "validation scenes (default 50)")->check(CLI::NonNegativeNumber);
  gen_flags.value(gen, "--test-scenes", "test_scenes", "test scenes (default 100)")->check(CLI::NonNegativeNumber);
  gen_flags.value(gen, "--classes", "num_object_classes", "object classes (default 10)")->check(CLI::PositiveNumber);
  gen_flags.value(gen, "--predicates", "num_predicates", "predicate classes (default 6)")->check(CLI::PositiveNumber);
  gen_flags.value(gen, "--occlusion", "occlusion_rate", "chance a node is placed over another (default 0.3)")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--corpus", gen_dir, "output corpus directory")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "train a model");
  KeyFlags train_flags;
  std::string train_corpus = "corpus", checkpoint = "model.ckpt", train_log = "train_log.csv";
  add_train_flags(tr, train_flags);
  tr->add_option("--corpus", train_corpus, "corpus directory")->capture_default_str();
  tr->add_option("--checkpoint", checkpoint, "checkpoint to write")->capture_default_str();
  tr->add_option("--log", train_log, "epoch log CSV to write")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_corpus = "corpus", eval_ckpt = "model.ckpt", metrics_path = "metrics.csv", split = "test";
  std::optional<std::string> eval_task;
  ev->add_option("--corpus", eval_corpus, "corpus directory")->capture_default_str();
  ev->add_option("--checkpoint", eval_ckpt, "checkpoint to read")->capture_default_str();
  ev->add_option("--metrics", metrics_path, "metrics CSV to write")->capture_default_str();
  ev->add_option("--split", split, "val or test")->check(CLI::IsMember({"val", "test"}))->capture_default_str();
  ev->add_option_function<std::string>("--task", [&](const std::string& t) { eval_task = t; },
                                       "predcls or sgcls (default both)");

  // ablate and sweep
  auto* ab = app.add_subcommand("ablate", "train and evaluate the 8-row module toggle grid");
  auto* sw = app.add_subcommand("sweep", "sweep tau, layers or steps");
  KeyFlags ablate_flags, sweep_flags;
  std::string ablate_corpus = "corpus", sweep_corpus = "corpus", sweep_param;
  int ablate_seeds = 1, sweep_seeds = 1;
  add_train_flags(ab, ablate_flags);
  add_train_flags(sw, sweep_flags);
  ab->add_option("--corpus", ablate_corpus, "corpus directory")->capture_default_str();
  sw->add_option("--corpus", sweep_corpus, "corpus directory")->capture_default_str();
  ab->add_option("--seeds", ablate_seeds, "seeds per cell, counting up from --seed")->capture_default_str();
  sw->add_option("--seeds", sweep_seeds, "seeds per cell, counting up from --seed")->capture_default_str();
  sw->add_option("--param", sweep_param, "tau, layers or steps")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    fs::create_directories(g.out_dir);
    RunManifest m;
    if (gen->parsed()) {
      const KeyValues kv = merged(g, gen_flags);
      const GenConfig cfg = GenConfig::from_key_values(kv);
      cfg.validate();
      const Corpus corpus = generate_corpus(cfg);
      const fs::path dir = resolve(g, gen_dir);
      write_corpus(dir, corpus, cfg);
      m = {"gen", cfg.to_key_values(), cfg.seed, hex64(corpus_hash(dir)), "", "", 0.0};
      out << "wrote " << corpus.train.size() << " train, " << corpus.val.size() << " val, " << corpus.test.size()
          << " test scenes to " << dir.string() << "\n";
    } else if (tr->parsed()) {
      const fs::path dir = resolve(g, train_corpus);
      const LoadedCorpus lc = read_corpus(dir);
      const TrainConfig cfg = train_config(g, train_flags, lc.config);
      const TrainResult result = train(lc.corpus, cfg, [&](const EpochLog& e) {
        err << "epoch " << e.epoch << "/" << cfg.epochs << " loss " << format_fixed(e.train_loss, 4) << " val_acc "
            << format_fixed(e.val_node_accuracy, 1) << " val_R@50 " << format_fixed(e.val_recall50, 1) << "\n";
      });
      save_checkpoint(resolve(g, checkpoint), cfg, result.model);
      write_file_atomic(resolve(g, train_log), epoch_log_csv(result.log));
      m = {"train", cfg.to_key_values(), cfg.seed, hex64(corpus_hash(dir)), checkpoint, "", 0.0};
      out << "wrote " << resolve(g, checkpoint).string() << "\n";
    } else if (ev->parsed()) {
      const fs::path dir = resolve(g, eval_corpus);
      const LoadedCorpus lc = read_corpus(dir);
      const Checkpoint ck = load_checkpoint(resolve(g, eval_ckpt));
      const auto& mc = ck.config.model;
      if (mc.num_object_classes != lc.config.num_object_classes || mc.num_predicates != lc.config.num_predicates ||
          mc.appearance_dim != lc.config.appearance_dim) {
        throw ConfigError("checkpoint expects " + std::to_string(mc.num_object_classes) + " classes, " +
                          std::to_string(mc.num_predicates) + " predicates and appearance dim " +
                          std::to_string(mc.appearance_dim) + "; the corpus has " +
                          std::to_string(lc.config.num_object_classes) + ", " +
                          std::to_string(lc.config.num_predicates) + " and " +
                          std::to_string(lc.config.appearance_dim));
      }
      std::vector<Task> tasks = {Task::SgCls, Task::PredCls};
      if (eval_task) tasks = {parse_task(*eval_task)};
      const auto& scenes = split == "val" ? lc.corpus.val : lc.corpus.test;
      std::vector<MetricsReport> reports;
      for (Task t : tasks) reports.push_back(evaluate(ck.model, scenes, t));
      write_file_atomic(resolve(g, metrics_path), metrics_csv(reports));
      m = {"eval", ck.config.to_key_values(), ck.config.seed, hex64(corpus_hash(dir)), eval_ckpt, metrics_path, 0.0};
      m.config["split"] = split;
      out << metrics_table(reports);
    } else if (ab->parsed() || sw->parsed()) {
      const bool ablate = ab->parsed();
      const fs::path dir = resolve(g, ablate ? ablate_corpus : sweep_corpus);
      const LoadedCorpus lc = read_corpus(dir);
      const TrainConfig base = train_config(g, ablate ? ablate_flags : sweep_flags, lc.config);
      const auto seeds = seed_list(base.seed, ablate ? ablate_seeds : sweep_seeds);
      std::vector<GridResult> rows;
      std::string stem, svg;
      if (ablate) {
        rows = ablation_run(lc.corpus, base, seeds);
        stem = "ablation";
        svg = svg_bar_chart("Module ablation, SGCLS", "R@50 (%)", mean_by_label(rows, sgcls_r50));
      } else {
        const SweepParam p = parse_sweep_param(sweep_param);
        rows = sweep_run(lc.corpus, base, p, seeds);
        stem = "sweep_" + to_string(p);
        std::vector<Series> series = {{"SGCLS R@50", {}}, {"PREDCLS R@50", {}}};
        for (const auto& lm : mean_by_label(rows, sgcls_r50)) series[0].y.push_back(lm.mean);
        for (const auto& lm : mean_by_label(rows, predcls_r50)) series[1].y.push_back(lm.mean);
        svg = svg_line_chart("Sweep over " + to_string(p), to_string(p), "R@50 (%)", sweep_values(p), series);
      }
      write_file_atomic(resolve(g, stem + ".csv"), grid_csv(rows));
      write_file_atomic(resolve(g, stem + ".svg"), svg);
      KeyValues cfg = base.to_key_values();
      cfg["seeds"] = std::to_string(seeds.size());
      if (!ablate) cfg["param"] = sweep_param;
      m = {ablate ? "ablate" : "sweep", cfg, base.seed, hex64(corpus_hash(dir)), "", stem + ".csv", 0.0};
      out << grid_summary(rows);
    }
    m.wall_clock_seconds = seconds_since(start);
    write_manifest(resolve(g, m.command + ".manifest.json"), m);
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hlnet::cli
