#include "assm/trace_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "assm/dataset_io.hpp"
#include "assm/errors.hpp"

namespace assm {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 320.0;
constexpr double kMarginLeft = 50.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 20.0;
constexpr double kMarginBottom = 30.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#8c564b", "#e377c2"};

std::string svg_coord(double v) {
  // Two decimals is plenty for screen coordinates and keeps files small.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string trace_csv_path(const std::string& plot_path) {
  const auto dot = plot_path.rfind('.');
  const auto slash = plot_path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return plot_path + ".csv";
  }
  return plot_path.substr(0, dot) + ".csv";
}

void emit_trace_plot(const std::vector<ScoreTrace>& traces,
                     const std::vector<int>& labels, const std::string& path) {
  if (traces.empty()) throw ValidationError("emit_trace_plot: no traces");
  const size_t T = labels.size();
  if (T == 0) throw ValidationError("emit_trace_plot: empty labels");
  for (const auto& trace : traces) {
    if (trace.scores.size() != T) {
      throw ValidationError("emit_trace_plot: trace '" + trace.name +
                            "' length differs from labels");
    }
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
  }

  double max_score = 0.0;
  for (const auto& trace : traces) {
    for (double s : trace.scores) {
      if (!std::isfinite(s)) {
        throw ValidationError("emit_trace_plot: non-finite score");
      }
      max_score = std::max(max_score, s);
    }
  }
  if (max_score <= 0.0) max_score = 1.0;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto x_at = [&](size_t t) {
    return kMarginLeft +
           plot_w * (T > 1 ? static_cast<double>(t) / (T - 1) : 0.5);
  };
  auto y_at = [&](double score) {
    return kMarginTop + plot_h * (1.0 - score / max_score);
  };

  std::ofstream svg(path, std::ios::trunc);
  if (!svg) throw IoError("cannot open for writing: " + path);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Ground-truth anomaly markers.
  for (size_t t = 0; t < T; ++t) {
    if (labels[t] != 1) continue;
    svg << "  <line x1=\"" << svg_coord(x_at(t)) << "\" y1=\""
        << svg_coord(kMarginTop) << "\" x2=\"" << svg_coord(x_at(t))
        << "\" y2=\"" << svg_coord(kMarginTop + plot_h)
        << "\" stroke=\"#cccccc\" stroke-width=\"2\"/>\n";
  }

  // Axes.
  svg << "  <line x1=\"" << svg_coord(kMarginLeft) << "\" y1=\""
      << svg_coord(kMarginTop + plot_h) << "\" x2=\""
      << svg_coord(kMarginLeft + plot_w) << "\" y2=\""
      << svg_coord(kMarginTop + plot_h)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "  <line x1=\"" << svg_coord(kMarginLeft) << "\" y1=\""
      << svg_coord(kMarginTop) << "\" x2=\"" << svg_coord(kMarginLeft)
      << "\" y2=\"" << svg_coord(kMarginTop + plot_h)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  for (size_t i = 0; i < traces.size(); ++i) {
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg << "  <polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t t = 0; t < T; ++t) {
      if (t > 0) svg << ' ';
      svg << svg_coord(x_at(t)) << ',' << svg_coord(y_at(traces[i].scores[t]));
    }
    svg << "\"/>\n";
    svg << "  <text x=\"" << svg_coord(kMarginLeft + 8)
        << "\" y=\"" << svg_coord(kMarginTop + 16 + 18 * static_cast<double>(i))
        << "\" fill=\"" << color << "\" font-family=\"monospace\" font-size=\"13\">"
        << traces[i].name << "</text>\n";
  }
  svg << "</svg>\n";
  if (!svg) throw IoError("write failed: " + path);

  // CSV twin of exactly what was plotted.
  const std::string csv_path = trace_csv_path(path);
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw IoError("cannot open for writing: " + csv_path);
  csv << "t";
  for (const auto& trace : traces) csv << ",score_" << trace.name;
  csv << ",label\n";
  for (size_t t = 0; t < T; ++t) {
    csv << t;
    for (const auto& trace : traces) {
      csv << ',' << format_double(trace.scores[t]);
    }
    csv << ',' << labels[t] << '\n';
  }
  if (!csv) throw IoError("write failed: " + csv_path);
}

}  // namespace assm
