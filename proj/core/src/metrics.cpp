#include "hlnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "hlnet/errors.hpp"
#include "hlnet/format.hpp"

namespace hlnet {

namespace {

constexpr double kMatchIou = 0.5;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double percent(const std::optional<double>& v) { return v ? 100.0 * *v : kNaN; }

bool same_number(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

void require_aligned(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes) {
  if (preds.size() != scenes.size()) {
    throw DimensionError(std::to_string(preds.size()) + " prediction sets for " + std::to_string(scenes.size()) +
                         " scenes");
  }
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

}  // namespace

std::string to_string(Task task) { return task == Task::PredCls ? "predcls" : "sgcls"; }

Task parse_task(std::string_view s) {
  if (s == "predcls") return Task::PredCls;
  if (s == "sgcls") return Task::SgCls;
  throw ConfigError("unknown task '" + std::string(s) + "' (expected predcls or sgcls)");
}

bool rank_before(const ScoredTriplet& a, const ScoredTriplet& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.subject, a.object, a.predicate) < std::tie(b.subject, b.object, b.predicate);
}

void rank_triplets(std::vector<ScoredTriplet>& triplets) { std::sort(triplets.begin(), triplets.end(), rank_before); }

bool triplet_matches(const PredictionSet& pred, const ScoredTriplet& t, const SceneGraph& g, const Triplet& gt) {
  if (t.predicate != gt.predicate) return false;
  if (pred.node_classes[t.subject] != g.nodes[gt.subject].class_label) return false;
  if (pred.node_classes[t.object] != g.nodes[gt.object].class_label) return false;
  return iou(g.nodes[t.subject].box, g.nodes[gt.subject].box) >= kMatchIou &&
         iou(g.nodes[t.object].box, g.nodes[gt.object].box) >= kMatchIou;
}

bool phrase_matches(const PredictionSet& pred, const ScoredTriplet& t, const SceneGraph& g, const Triplet& gt) {
  if (t.predicate != gt.predicate) return false;
  if (pred.node_classes[t.subject] != g.nodes[gt.subject].class_label) return false;
  if (pred.node_classes[t.object] != g.nodes[gt.object].class_label) return false;
  const Box predicted = union_box(g.nodes[t.subject].box, g.nodes[t.object].box);
  const Box truth = union_box(g.nodes[gt.subject].box, g.nodes[gt.object].box);
  return iou(predicted, truth) >= kMatchIou;
}

std::vector<bool> matched_gt(const PredictionSet& pred, const SceneGraph& g, std::size_t k) {
  std::vector<bool> matched(g.gt_triplets.size(), false);
  const std::size_t top = std::min(k, pred.triplets.size());
  for (std::size_t r = 0; r < top; ++r) {
    for (std::size_t t = 0; t < g.gt_triplets.size(); ++t) {
      if (!matched[t] && triplet_matches(pred, pred.triplets[r], g, g.gt_triplets[t])) {
        matched[t] = true;
        break;
      }
    }
  }
  return matched;
}

std::optional<double> recall_at_k(const PredictionSet& pred, const SceneGraph& g, std::size_t k) {
  if (g.gt_triplets.empty()) return std::nullopt;
  const auto matched = matched_gt(pred, g, k);
  const auto hits = std::count(matched.begin(), matched.end(), true);
  return static_cast<double>(hits) / static_cast<double>(matched.size());
}

std::optional<double> corpus_recall_at_k(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes,
                                         std::size_t k) {
  require_aligned(preds, scenes);
  std::vector<double> per_scene;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    if (auto r = recall_at_k(preds[s], scenes[s], k)) per_scene.push_back(*r);
  }
  return mean_of(per_scene);
}

std::optional<double> mean_recall_at_k(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes,
                                       std::size_t k) {
  require_aligned(preds, scenes);
  std::map<int, std::vector<double>> per_predicate;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const auto& g = scenes[s];
    if (g.gt_triplets.empty()) continue;
    const auto matched = matched_gt(preds[s], g, k);
    std::map<int, std::pair<int, int>> counts;  // predicate -> (hits, total)
    for (std::size_t t = 0; t < g.gt_triplets.size(); ++t) {
      auto& c = counts[g.gt_triplets[t].predicate];
      c.first += matched[t] ? 1 : 0;
      ++c.second;
    }
    for (const auto& [p, c] : counts) {
      per_predicate[p].push_back(static_cast<double>(c.first) / static_cast<double>(c.second));
    }
  }
  std::vector<double> recalls;
  for (const auto& [p, v] : per_predicate) recalls.push_back(*mean_of(v));
  return mean_of(recalls);
}

OcclusionSplit occlusion_split_recall(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes,
                                      std::size_t k) {
  require_aligned(preds, scenes);
  std::vector<double> occluded, clear;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const auto& g = scenes[s];
    if (g.gt_triplets.empty()) continue;
    const auto matched = matched_gt(preds[s], g, k);
    int hits[2] = {0, 0}, total[2] = {0, 0};
    for (std::size_t t = 0; t < g.gt_triplets.size(); ++t) {
      const auto& gt = g.gt_triplets[t];
      const int split = heavily_occluded(g, gt.subject) || heavily_occluded(g, gt.object) ? 0 : 1;
      hits[split] += matched[t] ? 1 : 0;
      ++total[split];
    }
    if (total[0]) occluded.push_back(static_cast<double>(hits[0]) / total[0]);
    if (total[1]) clear.push_back(static_cast<double>(hits[1]) / total[1]);
  }
  return {mean_of(occluded), mean_of(clear)};
}

double average_precision(const std::vector<bool>& hits, std::size_t positives, const std::vector<double>& scores) {
  if (positives == 0) return 0.0;
  if (!scores.empty() && scores.size() != hits.size()) {
    throw DimensionError(std::to_string(scores.size()) + " scores for " + std::to_string(hits.size()) + " detections");
  }
  // One PR point per distinct score: the last rank of each run of ties.
  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t r = 0; r < hits.size(); ++r) {
    tp += hits[r] ? 1 : 0;
    const bool closes_run = scores.empty() || r + 1 == hits.size() || scores[r + 1] != scores[r];
    if (!closes_run) continue;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(r + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(positives));
  }
  // Envelope: best precision at this point or any later one.
  for (std::size_t r = precision.size(); r-- > 1;) precision[r - 1] = std::max(precision[r - 1], precision[r]);
  double ap = 0.0, previous_recall = 0.0;
  for (std::size_t r = 0; r < precision.size(); ++r) {
    ap += (recall[r] - previous_recall) * precision[r];
    previous_recall = recall[r];
  }
  return ap;
}

std::optional<double> wmap(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes, ApMode mode) {
  require_aligned(preds, scenes);
  std::map<int, std::size_t> positives;
  std::size_t total = 0;
  for (const auto& g : scenes) {
    for (const auto& t : g.gt_triplets) {
      ++positives[t.predicate];
      ++total;
    }
  }
  if (total == 0) return std::nullopt;

  struct Entry {
    double score;
    std::size_t scene;
    ScoredTriplet triplet;
  };
  double result = 0.0;
  for (const auto& [predicate, count] : positives) {
    std::vector<Entry> entries;
    for (std::size_t s = 0; s < preds.size(); ++s) {
      for (const auto& t : preds[s].triplets) {
        if (t.predicate == predicate) entries.push_back({t.score, s, t});
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.scene != b.scene) return a.scene < b.scene;
      return rank_before(a.triplet, b.triplet);
    });
    std::vector<std::vector<bool>> claimed(scenes.size());
    for (std::size_t s = 0; s < scenes.size(); ++s) claimed[s].assign(scenes[s].gt_triplets.size(), false);
    std::vector<bool> hits;
    std::vector<double> scores;
    for (const auto& e : entries) {
      scores.push_back(e.score);
      const auto& g = scenes[e.scene];
      bool hit = false;
      for (std::size_t t = 0; t < g.gt_triplets.size() && !hit; ++t) {
        if (claimed[e.scene][t]) continue;
        const bool ok = mode == ApMode::Relation ? triplet_matches(preds[e.scene], e.triplet, g, g.gt_triplets[t])
                                                 : phrase_matches(preds[e.scene], e.triplet, g, g.gt_triplets[t]);
        if (ok) {
          claimed[e.scene][t] = true;
          hit = true;
        }
      }
      hits.push_back(hit);
    }
    result += static_cast<double>(count) / static_cast<double>(total) * average_precision(hits, count, scores);
  }
  return result;
}

double score_wtd(double r50, double wmap_rel, double wmap_phr) { return 0.2 * r50 + 0.4 * wmap_rel + 0.4 * wmap_phr; }

std::optional<double> node_accuracy(const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes) {
  require_aligned(preds, scenes);
  std::size_t hits = 0, total = 0;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    for (std::size_t i = 0; i < scenes[s].nodes.size(); ++i) {
      hits += preds[s].node_classes[i] == scenes[s].nodes[i].class_label ? 1 : 0;
      ++total;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

bool MetricsReport::operator==(const MetricsReport& o) const {
  auto arrays_equal = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return std::equal(a.begin(), a.end(), b.begin(), same_number);
  };
  return task == o.task && arrays_equal(recall, o.recall) && arrays_equal(mean_recall, o.mean_recall) &&
         arrays_equal(occluded_recall, o.occluded_recall) && arrays_equal(clear_recall, o.clear_recall) &&
         same_number(wmap_rel, o.wmap_rel) && same_number(wmap_phr, o.wmap_phr) && same_number(score, o.score) &&
         same_number(node_accuracy, o.node_accuracy) && same_number(homophily, o.homophily);
}

MetricsReport compute_metrics(Task task, const std::vector<PredictionSet>& preds, const std::vector<SceneGraph>& scenes) {
  MetricsReport r;
  r.task = task;
  for (std::size_t k = 0; k < kRecallKs.size(); ++k) {
    r.recall[k] = percent(corpus_recall_at_k(preds, scenes, kRecallKs[k]));
    r.mean_recall[k] = percent(mean_recall_at_k(preds, scenes, kRecallKs[k]));
    const auto split = occlusion_split_recall(preds, scenes, kRecallKs[k]);
    r.occluded_recall[k] = percent(split.occluded);
    r.clear_recall[k] = percent(split.clear);
  }
  r.wmap_rel = percent(wmap(preds, scenes, ApMode::Relation));
  r.wmap_phr = percent(wmap(preds, scenes, ApMode::Phrase));
  r.score = score_wtd(r.recall[1], r.wmap_rel, r.wmap_phr);
  r.node_accuracy = percent(node_accuracy(preds, scenes));
  try {
    r.homophily = mean_homophily(scenes);
  } catch (const UndefinedMetricError&) {
    r.homophily = kNaN;
  }
  return r;
}

namespace {

std::string value_text(double v) { return std::isnan(v) ? "nan" : format_double(v); }

}  // namespace

std::string metrics_csv(const std::vector<MetricsReport>& reports) {
  std::string out = "metric,task,K,value\n";
  for (const auto& r : reports) {
    const std::string task = to_string(r.task);
    auto row = [&](const char* metric, const std::string& k, double v) {
      out += std::string(metric) + "," + task + "," + k + "," + value_text(v) + "\n";
    };
    for (std::size_t k = 0; k < kRecallKs.size(); ++k) row("recall", std::to_string(kRecallKs[k]), r.recall[k]);
    for (std::size_t k = 0; k < kRecallKs.size(); ++k) row("mean_recall", std::to_string(kRecallKs[k]), r.mean_recall[k]);
    for (std::size_t k = 0; k < kRecallKs.size(); ++k) {
      row("occluded_recall", std::to_string(kRecallKs[k]), r.occluded_recall[k]);
    }
    for (std::size_t k = 0; k < kRecallKs.size(); ++k) row("clear_recall", std::to_string(kRecallKs[k]), r.clear_recall[k]);
    row("wmap_rel", "-", r.wmap_rel);
    row("wmap_phr", "-", r.wmap_phr);
    row("score_wtd", "-", r.score);
    row("node_accuracy", "-", r.node_accuracy);
    row("homophily", "-", r.homophily);
  }
  return out;
}

std::vector<MetricsReport> parse_metrics_csv(std::string_view text) {
  std::vector<MetricsReport> reports;
  std::map<Task, std::size_t> index;
  std::size_t line_no = 0;
  bool header = true;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    if (header) {
      if (line != "metric,task,K,value") throw ParseError("expected header metric,task,K,value", line_no);
      header = false;
      continue;
    }
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 4) throw ParseError("expected 4 fields", line_no);
    Task task;
    double value;
    try {
      task = parse_task(fields[1]);
      value = fields[3] == "nan" ? kNaN : parse_double(fields[3]);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
    auto [it, fresh] = index.try_emplace(task, reports.size());
    if (fresh) {
      reports.emplace_back();
      reports.back().task = task;
    }
    MetricsReport& r = reports[it->second];
    const std::string_view metric = fields[0];
    std::size_t slot = kRecallKs.size();
    if (fields[2] != "-") {
      for (std::size_t k = 0; k < kRecallKs.size(); ++k) {
        if (fields[2] == std::to_string(kRecallKs[k])) slot = k;
      }
      if (slot == kRecallKs.size()) throw ParseError("unsupported K '" + std::string(fields[2]) + "'", line_no);
    }
    const bool with_k = slot < kRecallKs.size();
    if (with_k && metric == "recall") {
      r.recall[slot] = value;
    } else if (with_k && metric == "mean_recall") {
      r.mean_recall[slot] = value;
    } else if (with_k && metric == "occluded_recall") {
      r.occluded_recall[slot] = value;
    } else if (with_k && metric == "clear_recall") {
      r.clear_recall[slot] = value;
    } else if (!with_k && metric == "wmap_rel") {
      r.wmap_rel = value;
    } else if (!with_k && metric == "wmap_phr") {
      r.wmap_phr = value;
    } else if (!with_k && metric == "score_wtd") {
      r.score = value;
    } else if (!with_k && metric == "node_accuracy") {
      r.node_accuracy = value;
    } else if (!with_k && metric == "homophily") {
      r.homophily = value;
    } else {
      throw ParseError("unknown metric '" + std::string(metric) + "'", line_no);
    }
  }
  if (header && line_no > 0) throw ParseError("missing header", line_no);
  return reports;
}

std::string metrics_table(const std::vector<MetricsReport>& reports) {
  auto cell = [](double v) { return std::isnan(v) ? std::string("-") : format_fixed(v, 1); };
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  std::string out = "task     R@20  R@50 R@100 mR@20 mR@50 mR@100  C@50  S@50 wmAPrel wmAPphr score   acc      h\n";
  for (const auto& r : reports) {
    std::string line = to_string(r.task);
    line.resize(7, ' ');
    for (double v : r.recall) line += pad(cell(v), 6);
    for (std::size_t k = 0; k < 3; ++k) line += pad(cell(r.mean_recall[k]), k == 2 ? 7 : 6);
    line += pad(cell(r.occluded_recall[1]), 6) + pad(cell(r.clear_recall[1]), 6);
    line += pad(cell(r.wmap_rel), 8) + pad(cell(r.wmap_phr), 8) + pad(cell(r.score), 6) + pad(cell(r.node_accuracy), 6);
    line += pad(std::isnan(r.homophily) ? "-" : format_fixed(r.homophily, 3), 7);
    out += line + "\n";
  }
  return out;
}

}  // namespace hlnet
