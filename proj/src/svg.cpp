#include "disentangle/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "disentangle/error.hpp"

namespace disentangle::svg {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const char* kPalette[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52", "#8172B3", "#937860", "#DA8BC3", "#8C8C8C"};

}  // namespace

std::string render(const BarChart& chart) {
  const std::size_t nk = chart.categories.size();
  const std::size_t ns = chart.values.size();
  if (ns == 0 || nk == 0) throw ArgumentError("svg: chart has no data");
  for (const auto& v : chart.values) {
    if (v.size() != nk) throw ArgumentError("svg: series length does not match category count");
  }
  if (!chart.errors.empty()) {
    if (chart.errors.size() != ns) throw ArgumentError("svg: error series count mismatch");
    for (const auto& e : chart.errors) {
      if (e.size() != nk) throw ArgumentError("svg: error length does not match category count");
    }
  }
  double top = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t k = 0; k < nk; ++k) {
      const double e = chart.errors.empty() ? 0.0 : chart.errors[s][k];
      if (std::isfinite(chart.values[s][k])) top = std::max(top, chart.values[s][k] + e);
    }
  }
  if (chart.y_max) top = *chart.y_max;
  if (!(top > 0.0)) top = 1.0;

  const double left = 60, right = 20, header = 40, bottom = 50;
  const double legend = ns > 1 ? 20.0 * static_cast<double>(ns) + 10 : 0.0;
  const double group_w = std::max(40.0, 18.0 * static_cast<double>(ns) + 16);
  const double plot_w = group_w * static_cast<double>(nk);
  const double plot_h = 260;
  const double width = left + plot_w + right + (ns > 1 ? 140 : 0);
  const double height = header + plot_h + bottom + std::max(0.0, legend - plot_h);
  auto y_of = [&](double v) { return header + plot_h * (1.0 - std::clamp(v / top, 0.0, 1.0)); };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(chart.title) +
       "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = top * t / 4.0;
    const double y = y_of(v);
    o += "<line x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left + plot_w) + "\" y2=\"" + num(y) +
         "\" stroke=\"#dddddd\"/>\n";
    o += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + tick(v) + "</text>\n";
  }
  if (!chart.y_label.empty()) {
    o += "<text x=\"14\" y=\"" + num(header + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         num(header + plot_h / 2) + ")\">" + escape(chart.y_label) + "</text>\n";
  }
  const double bar_w = (group_w - 16) / static_cast<double>(ns);
  for (std::size_t k = 0; k < nk; ++k) {
    const double gx = left + group_w * static_cast<double>(k) + 8;
    for (std::size_t s = 0; s < ns; ++s) {
      const double v = chart.values[s][k];
      const double x = gx + bar_w * static_cast<double>(s);
      const double y = y_of(std::isfinite(v) ? v : 0.0);
      o += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(bar_w - 2) + "\" height=\"" +
           num(header + plot_h - y) + "\" fill=\"" + kPalette[s % 8] + "\"/>\n";
      if (!chart.errors.empty() && chart.errors[s][k] > 0.0) {
        const double cx = x + (bar_w - 2) / 2;
        const double y0 = y_of(v - chart.errors[s][k]);
        const double y1 = y_of(v + chart.errors[s][k]);
        o += "<line x1=\"" + num(cx) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(cx) + "\" y2=\"" + num(y1) +
             "\" stroke=\"black\"/>\n";
      }
    }
    o += "<text x=\"" + num(gx + (group_w - 16) / 2) + "\" y=\"" + num(header + plot_h + 18) +
         "\" text-anchor=\"middle\">" + escape(chart.categories[k]) + "</text>\n";
  }
  o += "<line x1=\"" + num(left) + "\" y1=\"" + num(header + plot_h) + "\" x2=\"" + num(left + plot_w) + "\" y2=\"" +
       num(header + plot_h) + "\" stroke=\"black\"/>\n";
  if (ns > 1) {
    for (std::size_t s = 0; s < ns; ++s) {
      const double y = header + 20.0 * static_cast<double>(s);
      const std::string name = s < chart.series.size() ? chart.series[s] : "series " + std::to_string(s + 1);
      o += "<rect x=\"" + num(left + plot_w + 16) + "\" y=\"" + num(y) + "\" width=\"12\" height=\"12\" fill=\"" +
           kPalette[s % 8] + "\"/>\n";
      o += "<text x=\"" + num(left + plot_w + 34) + "\" y=\"" + num(y + 10) + "\">" + escape(name) + "</text>\n";
    }
  }
  o += "</svg>\n";
  return o;
}

BarChart importance_chart(const std::string& title, const std::vector<double>& mean,
                          const std::vector<double>& stddev) {
  BarChart c;
  c.title = title;
  c.y_label = "normalized importance";
  for (std::size_t j = 0; j < mean.size(); ++j) c.categories.push_back(std::to_string(j + 1));
  c.values = {mean};
  if (!stddev.empty()) c.errors = {stddev};
  return c;
}

}  // namespace disentangle::svg
