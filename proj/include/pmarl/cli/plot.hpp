#pragma once

#include <string>
#include <vector>

namespace pmarl::cli {

/// One column of a metrics CSV against env_steps; rows where the column is
/// nan are skipped.
struct MetricsSeries {
  std::string path;
  /// Run name from the "run=<name>" header token, else the file stem.
  std::string label;
  std::vector<double> steps;
  std::vector<double> values;
};

/// Throws ConfigError naming file and line on malformed input.
MetricsSeries read_metrics_series(const std::string& path, const std::string& column);

/// Mean and sample standard deviation across the runs sharing a label, on
/// the step grid of the group's first run. Other runs are linearly
/// interpolated onto that grid (clamped at their ends).
struct CurveGroup {
  std::string label;
  int runs = 0;
  std::vector<double> steps;
  std::vector<double> mean;
  std::vector<double> stddev;
};

std::vector<CurveGroup> aggregate_curves(const std::vector<MetricsSeries>& series);

double interpolate(double x, const std::vector<double>& xs, const std::vector<double>& ys);

/// Line per group with a shaded +-1 std band and a legend.
std::string render_svg(const std::vector<CurveGroup>& groups, const std::string& title, const std::string& y_label);

}  // namespace pmarl::cli
