#include "pmarl/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "pmarl/common/csv.hpp"
#include "pmarl/common/error.hpp"

namespace pmarl::cli {

namespace {

std::string label_from_comments(const std::vector<std::string>& comments, const std::string& path) {
  for (const std::string& line : comments) {
    std::istringstream in(line);
    std::string token;
    while (in >> token) {
      if (token.rfind("run=", 0) == 0 && token.size() > 4) return token.substr(4);
    }
  }
  return std::filesystem::path(path).stem().string();
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

const char* kPalette[] = {"#1f77b4", "#2ca02c", "#d62728", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

MetricsSeries read_metrics_series(const std::string& path, const std::string& column) {
  const csv::Table table = csv::read(path);
  const int step_col = table.column("env_steps");
  const int value_col = table.column(column);
  if (step_col < 0) throw ConfigError(path + ":1: missing column 'env_steps'");
  if (value_col < 0) throw ConfigError(path + ":1: missing column '" + column + "'");

  MetricsSeries s;
  s.path = path;
  s.label = label_from_comments(table.comments, path);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const int line = table.row_lines[r];
    const double step = csv::to_double(table.rows[r][step_col], path, line);
    const double value = csv::to_double(table.rows[r][value_col], path, line);
    if (std::isnan(value)) continue;
    if (!s.steps.empty() && step < s.steps.back()) {
      throw ConfigError(path + ":" + std::to_string(line) + ": env_steps must not decrease");
    }
    s.steps.push_back(step);
    s.values.push_back(value);
  }
  if (s.steps.empty()) throw ConfigError(path + ": no values in column '" + column + "'");
  return s;
}

double interpolate(double x, const std::vector<double>& xs, const std::vector<double>& ys) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double span = xs[hi] - xs[lo];
  if (span <= 0.0) return ys[hi];
  const double t = (x - xs[lo]) / span;
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

std::vector<CurveGroup> aggregate_curves(const std::vector<MetricsSeries>& series) {
  std::vector<CurveGroup> groups;
  std::vector<std::vector<const MetricsSeries*>> members;
  for (const MetricsSeries& s : series) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const CurveGroup& g) { return g.label == s.label; });
    if (it == groups.end()) {
      groups.push_back({s.label, 0, {}, {}, {}});
      members.emplace_back();
      it = groups.end() - 1;
    }
    members[static_cast<std::size_t>(it - groups.begin())].push_back(&s);
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    CurveGroup& group = groups[g];
    const auto& runs = members[g];
    group.runs = static_cast<int>(runs.size());
    group.steps = runs.front()->steps;
    for (double x : group.steps) {
      std::vector<double> ys;
      for (const MetricsSeries* r : runs) ys.push_back(interpolate(x, r->steps, r->values));
      double mean = 0.0;
      for (double y : ys) mean += y;
      mean /= static_cast<double>(ys.size());
      double ss = 0.0;
      for (double y : ys) ss += (y - mean) * (y - mean);
      group.mean.push_back(mean);
      group.stddev.push_back(ys.size() > 1 ? std::sqrt(ss / static_cast<double>(ys.size() - 1)) : 0.0);
    }
  }
  return groups;
}

std::string render_svg(const std::vector<CurveGroup>& groups, const std::string& title, const std::string& y_label) {
  constexpr double W = 800, H = 500, left = 80, right = 200, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const CurveGroup& g : groups) {
    for (std::size_t k = 0; k < g.steps.size(); ++k) {
      x0 = std::min(x0, g.steps[k]);
      x1 = std::max(x1, g.steps[k]);
      y0 = std::min(y0, g.mean[k] - g.stddev[k]);
      y1 = std::max(y1, g.mean[k] + g.stddev[k]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape_xml(title)
      << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 5; ++k) {
    const double xv = x0 + (x1 - x0) * k / 5.0, yv = y0 + (y1 - y0) * k / 5.0;
    out << "<line x1=\"" << sx(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << sx(xv) << "\" y2=\"" << top + ph + 5
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\">" << num(xv)
        << "</text>\n";
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << left << "\" y2=\"" << sy(yv)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">environment steps</text>\n";
  out << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << top + ph / 2
      << ")\">" << escape_xml(y_label) << "</text>\n";

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const CurveGroup& c = groups[g];
    const char* color = kPalette[g % std::size(kPalette)];
    out << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t k = 0; k < c.steps.size(); ++k) out << sx(c.steps[k]) << ',' << sy(c.mean[k] + c.stddev[k]) << ' ';
    for (std::size_t k = c.steps.size(); k-- > 0;) out << sx(c.steps[k]) << ',' << sy(c.mean[k] - c.stddev[k]) << ' ';
    out << "\"/>\n";
    out << "<polyline class=\"mean\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < c.steps.size(); ++k) out << sx(c.steps[k]) << ',' << sy(c.mean[k]) << ' ';
    out << "\"/>\n";
    const double ly = top + 10 + 20.0 * static_cast<double>(g);
    out << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
    out << "<text x=\"" << left + pw + 45 << "\" y=\"" << ly + 4 << "\">" << escape_xml(c.label) << " (n=" << c.runs
        << ")</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace pmarl::cli
