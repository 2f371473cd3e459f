#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cprobe::cli {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct ChartSpec {
  std::string title;
  std::string xLabel;
  std::string yLabel;
  double xMin = 0.0, xMax = 1.0;
  double yMin = 0.0, yMax = 1.0;
};

/// One <polyline> per series, points in the given order.
std::string lineChartSvg(const ChartSpec& spec, const std::vector<Series>& series);

/// One <circle> per point, grouped per series, with an optional y = x line.
std::string scatterSvg(const ChartSpec& spec, const std::vector<Series>& series, bool diagonal);

std::string xmlEscape(const std::string& s);

}  // namespace cprobe::cli
