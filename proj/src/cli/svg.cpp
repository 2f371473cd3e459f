#include "culture_probe/cli/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "culture_probe/text.hpp"

namespace cprobe::cli {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Frame {
  const ChartSpec& spec;

  double x(double v) const {
    const double t = (v - spec.xMin) / (spec.xMax - spec.xMin);
    return kLeft + std::clamp(t, 0.0, 1.0) * (kWidth - kLeft - kRight);
  }
  double y(double v) const {
    const double t = (v - spec.yMin) / (spec.yMax - spec.yMin);
    return kHeight - kBottom - std::clamp(t, 0.0, 1.0) * (kHeight - kTop - kBottom);
  }
};

void header(std::ostringstream& out, const Frame& f) {
  const auto& s = f.spec;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << xmlEscape(s.title) << "</text>\n";
  out << "<g stroke=\"#888\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << num(f.x(s.xMin)) << "\" y1=\"" << num(f.y(s.yMin)) << "\" x2=\"" << num(f.x(s.xMax))
      << "\" y2=\"" << num(f.y(s.yMin)) << "\"/>\n";
  out << "<line x1=\"" << num(f.x(s.xMin)) << "\" y1=\"" << num(f.y(s.yMin)) << "\" x2=\"" << num(f.x(s.xMin))
      << "\" y2=\"" << num(f.y(s.yMax)) << "\"/>\n";
  out << "</g>\n";
  for (int i = 0; i <= 4; ++i) {
    const double vx = s.xMin + (s.xMax - s.xMin) * i / 4.0;
    const double vy = s.yMin + (s.yMax - s.yMin) * i / 4.0;
    out << "<text x=\"" << num(f.x(vx)) << "\" y=\"" << num(f.y(s.yMin) + 18) << "\" text-anchor=\"middle\">"
        << text::formatNumber(vx) << "</text>\n";
    out << "<text x=\"" << num(f.x(s.xMin) - 8) << "\" y=\"" << num(f.y(vy) + 4) << "\" text-anchor=\"end\">"
        << text::formatNumber(vy) << "</text>\n";
  }
  out << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 18)
      << "\" text-anchor=\"middle\">" << xmlEscape(s.xLabel) << "</text>\n";
  out << "<text x=\"18\" y=\"" << num((kTop + kHeight - kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num((kTop + kHeight - kBottom) / 2) << ")\">" << xmlEscape(s.yLabel) << "</text>\n";
}

void legend(std::ostringstream& out, const std::vector<Series>& series) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    const char* color = kPalette[i % std::size(kPalette)];
    out << "<rect x=\"" << num(kWidth - kRight + 16) << "\" y=\"" << num(y - 9) << "\" width=\"12\" height=\"12\" fill=\""
        << color << "\"/>\n";
    out << "<text x=\"" << num(kWidth - kRight + 34) << "\" y=\"" << num(y + 1) << "\">" << xmlEscape(series[i].name)
        << "</text>\n";
  }
}

}  // namespace

std::string xmlEscape(const std::string& s) {
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

std::string lineChartSvg(const ChartSpec& spec, const std::vector<Series>& series) {
  std::ostringstream out;
  const Frame f{spec};
  header(out, f);
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << "<polyline data-series=\"" << xmlEscape(series[i].name) << "\" fill=\"none\" stroke=\""
        << kPalette[i % std::size(kPalette)] << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < series[i].points.size(); ++k) {
      if (k) out << ' ';
      out << num(f.x(series[i].points[k].first)) << ',' << num(f.y(series[i].points[k].second));
    }
    out << "\"/>\n";
  }
  legend(out, series);
  out << "</svg>\n";
  return out.str();
}

std::string scatterSvg(const ChartSpec& spec, const std::vector<Series>& series, bool diagonal) {
  std::ostringstream out;
  const Frame f{spec};
  header(out, f);
  if (diagonal) {
    const double lo = std::max(spec.xMin, spec.yMin), hi = std::min(spec.xMax, spec.yMax);
    out << "<line class=\"diagonal\" x1=\"" << num(f.x(lo)) << "\" y1=\"" << num(f.y(lo)) << "\" x2=\"" << num(f.x(hi))
        << "\" y2=\"" << num(f.y(hi)) << "\" stroke=\"#444\" stroke-dasharray=\"4 4\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << "<g data-series=\"" << xmlEscape(series[i].name) << "\" fill=\"" << kPalette[i % std::size(kPalette)]
        << "\" fill-opacity=\"0.75\">\n";
    for (const auto& [x, y] : series[i].points)
      out << "<circle cx=\"" << num(f.x(x)) << "\" cy=\"" << num(f.y(y)) << "\" r=\"4\"/>\n";
    out << "</g>\n";
  }
  legend(out, series);
  out << "</svg>\n";
  return out.str();
}

}  // namespace cprobe::cli
