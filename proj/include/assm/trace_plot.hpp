#pragma once

#include <string>
#include <vector>

namespace assm {

struct ScoreTrace {
  std::string name;
  std::vector<double> scores;
};

// Writes an SVG overlaying the per-method score traces with ground-truth
// anomaly positions marked, plus a CSV twin of the plotted data at the same
// path with a .csv extension.  Output is deterministic (no timestamps).
void emit_trace_plot(const std::vector<ScoreTrace>& traces,
                     const std::vector<int>& labels, const std::string& path);

std::string trace_csv_path(const std::string& plot_path);

}  // namespace assm
