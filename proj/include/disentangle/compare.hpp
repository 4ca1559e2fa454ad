#pragma once

#include <string>
#include <vector>

#include "disentangle/io.hpp"
#include "disentangle/svg.hpp"

namespace disentangle {

struct CompareRow {
  std::string method;
  std::string setting;
  std::string modality;
  double best_lambda = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t seeds = 0;        // completed seeds at best_lambda
  std::size_t seeds_total = 0;  // seed rows at best_lambda, any status
};

struct Comparison {
  std::string metric;
  std::vector<CompareRow> rows;
  std::vector<std::string> warnings;
  svg::BarChart chart;  // per-lambda means, one series per method
};

// Aggregates metrics.csv tables: per (method, setting, modality) the mean and
// sample std of `metric` over ok seeds at each lambda, keeping the lambda
// with the largest mean (or smallest when minimize is set). Throws DataError
// when a table lacks the metric or the key columns, naming them.
Comparison compare_metrics(const std::vector<io::CsvTable>& metrics, const std::string& metric,
                           bool minimize = false);
// Reads <dir>/metrics.csv for every directory.
Comparison compare_runs(const std::vector<std::string>& run_dirs, const std::string& metric,
                        bool minimize = false);
std::string comparison_csv(const Comparison& c);

}  // namespace disentangle
