#include "hlnet_cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hlnet/format.hpp"

namespace hlnet::cli {

namespace {

std::string number(double v) { return std::isnan(v) ? "nan" : format_double(v); }

void append_report(std::string& line, const MetricsReport& r) {
  for (double v : r.recall) line += "," + number(v);
  for (double v : r.mean_recall) line += "," + number(v);
  line += "," + number(r.wmap_rel) + "," + number(r.wmap_phr) + "," + number(r.score) + "," + number(r.node_accuracy);
}

std::string report_header(const std::string& task) {
  std::string h;
  for (const char* k : {"r20", "r50", "r100", "mr20", "mr50", "mr100", "wmap_rel", "wmap_phr", "score_wtd", "node_acc"}) {
    h += "," + task + "_" + k;
  }
  return h;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string px(double v) { return format_fixed(v, 1); }

std::string svg_open(const std::string& title, const std::string& y_label) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) +
       "\" viewBox=\"0 0 " + px(kWidth) + " " + px(kHeight) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + px(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + escape_xml(title) +
       "</text>\n";
  s += "<text x=\"16\" y=\"" + px(kHeight / 2) + "\" transform=\"rotate(-90 16 " + px(kHeight / 2) +
       ")\" text-anchor=\"middle\" font-size=\"12\">" + escape_xml(y_label) + "</text>\n";
  s += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kHeight - kBottom) + "\" x2=\"" + px(kWidth - kRight) + "\" y2=\"" +
       px(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kTop) + "\" x2=\"" + px(kLeft) + "\" y2=\"" + px(kHeight - kBottom) +
       "\" stroke=\"black\"/>\n";
  return s;
}

// Upper end of the y axis: the largest finite value rounded up to a multiple
// of 10, at least 10.
double y_top(const std::vector<double>& values) {
  double top = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) top = std::max(top, v);
  }
  return std::max(10.0, std::ceil(top / 10.0) * 10.0);
}

double y_pixel(double v, double top) { return kHeight - kBottom - (kHeight - kTop - kBottom) * v / top; }

std::string y_ticks(double top) {
  std::string s;
  for (int i = 0; i <= 4; ++i) {
    const double v = top * i / 4.0;
    s += "<text x=\"" + px(kLeft - 6) + "\" y=\"" + px(y_pixel(v, top) + 4) +
         "\" text-anchor=\"end\" font-size=\"10\">" + format_fixed(v, 1) + "</text>\n";
  }
  return s;
}

}  // namespace

std::string grid_csv(const std::vector<GridResult>& rows) {
  std::string out = "label,seed,art,rfp,hmp,tau,layers,steps,beta" + report_header("sgcls") + report_header("predcls") + "\n";
  for (const auto& r : rows) {
    const auto& m = r.config.model;
    std::string line = r.label + "," + std::to_string(r.seed) + "," + (m.use_art ? "1" : "0") + "," +
                       (m.use_rfp ? "1" : "0") + "," + (m.use_hmp ? "1" : "0") + "," + number(m.tau) + "," +
                       std::to_string(m.layers) + "," + std::to_string(m.steps) + "," + number(m.beta);
    append_report(line, r.sgcls);
    append_report(line, r.predcls);
    out += line + "\n";
  }
  return out;
}

std::string epoch_log_csv(const std::vector<EpochLog>& log) {
  std::string out = "epoch,train_loss,val_node_accuracy,val_recall50\n";
  for (const auto& e : log) {
    out += std::to_string(e.epoch) + "," + number(e.train_loss) + "," + number(e.val_node_accuracy) + "," +
           number(e.val_recall50) + "\n";
  }
  return out;
}

std::vector<LabelMean> mean_by_label(const std::vector<GridResult>& rows, double (*value)(const GridResult&)) {
  std::vector<LabelMean> out;
  std::map<std::string, std::pair<double, int>> sums;
  for (const auto& r : rows) {
    auto [it, inserted] = sums.try_emplace(r.label, 0.0, 0);
    if (inserted) out.push_back({r.label, 0.0});
    it->second.first += value(r);
    ++it->second.second;
  }
  for (auto& m : out) m.mean = sums[m.label].first / sums[m.label].second;
  return out;
}

std::string svg_bar_chart(const std::string& title, const std::string& y_label, const std::vector<LabelMean>& bars) {
  std::vector<double> values;
  for (const auto& b : bars) values.push_back(b.mean);
  const double top = y_top(values);
  std::string s = svg_open(title, y_label) + y_ticks(top);
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(bars.size(), 1));
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double v = std::isfinite(bars[i].mean) ? bars[i].mean : 0.0;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    const double y = y_pixel(v, top);
    s += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(slot * 0.7) + "\" height=\"" +
         px(kHeight - kBottom - y) + "\" fill=\"" + kColors[0] + "\"/>\n";
    s += "<text x=\"" + px(x + slot * 0.35) + "\" y=\"" + px(y - 4) + "\" text-anchor=\"middle\" font-size=\"10\">" +
         format_fixed(bars[i].mean, 1) + "</text>\n";
    s += "<text x=\"" + px(x + slot * 0.35) + "\" y=\"" + px(kHeight - kBottom + 16) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + escape_xml(bars[i].label) + "</text>\n";
  }
  return s + "</svg>\n";
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<double>& x, const std::vector<Series>& series) {
  std::vector<double> values;
  for (const auto& sr : series) values.insert(values.end(), sr.y.begin(), sr.y.end());
  const double top = y_top(values);
  std::string s = svg_open(title, y_label) + y_ticks(top);
  const double plot_w = kWidth - kLeft - kRight;
  auto x_pixel = [&](std::size_t i) {
    return x.size() < 2 ? kLeft + plot_w / 2 : kLeft + plot_w * (0.1 + 0.8 * static_cast<double>(i) / (x.size() - 1));
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += "<text x=\"" + px(x_pixel(i)) + "\" y=\"" + px(kHeight - kBottom + 16) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + escape_xml(format_double(x[i])) + "</text>\n";
  }
  s += "<text x=\"" + px(kLeft + plot_w / 2) + "\" y=\"" + px(kHeight - 16) + "\" text-anchor=\"middle\" font-size=\"12\">" +
       escape_xml(x_label) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % 4];
    std::string points;
    for (std::size_t i = 0; i < series[k].y.size() && i < x.size(); ++i) {
      const double v = std::isfinite(series[k].y[i]) ? series[k].y[i] : 0.0;
      points += (i ? " " : "") + px(x_pixel(i)) + "," + px(y_pixel(v, top));
      s += "<circle cx=\"" + px(x_pixel(i)) + "\" cy=\"" + px(y_pixel(v, top)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    s += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + px(kWidth - kRight - 4) + "\" y=\"" + px(kTop + 14.0 * static_cast<double>(k)) +
         "\" text-anchor=\"end\" font-size=\"11\" fill=\"" + color + "\">" + escape_xml(series[k].name) + "</text>\n";
  }
  return s + "</svg>\n";
}

}  // namespace hlnet::cli
