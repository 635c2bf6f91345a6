#pragma once

#include <string>
#include <vector>

#include "hlnet/trainer.hpp"

namespace hlnet::cli {

// One row per grid cell: label, seed, toggles, hyperparameters, then the
// SGCLS and PREDCLS summaries.
std::string grid_csv(const std::vector<GridResult>& rows);
std::string epoch_log_csv(const std::vector<EpochLog>& log);

// Mean of `value` over rows sharing a label, labels in first-seen order.
struct LabelMean {
  std::string label;
  double mean = 0.0;
};
std::vector<LabelMean> mean_by_label(const std::vector<GridResult>& rows, double (*value)(const GridResult&));

struct Series {
  std::string name;
  std::vector<double> y;
};

// Standalone SVG documents.
std::string svg_bar_chart(const std::string& title, const std::string& y_label, const std::vector<LabelMean>& bars);
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<double>& x, const std::vector<Series>& series);

}  // namespace hlnet::cli
