#pragma once

#include <optional>
#include <string>
#include <vector>

namespace disentangle::svg {

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> categories;  // one bar (or group) per entry
  std::vector<std::string> series;      // empty or one name: single series
  // values[s][k] for series s, category k; errors alike (optional).
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> errors;
  std::optional<double> y_max;  // defaults to the largest bar plus its error
};

// Plain SVG text with rect/text/line elements only. Throws ArgumentError on
// ragged values or errors.
std::string render(const BarChart& chart);

// One bar per input coordinate, labelled 1..d.
BarChart importance_chart(const std::string& title, const std::vector<double>& mean,
                          const std::vector<double>& stddev = {});

}  // namespace disentangle::svg
