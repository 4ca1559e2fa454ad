#include "disentangle/compare.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <tuple>

#include "disentangle/error.hpp"

namespace disentangle {

namespace {

const char* kKeyColumns[] = {"seed", "method", "setting", "modality", "lambda", "status"};

}  // namespace

Comparison compare_metrics(const std::vector<io::CsvTable>& metrics, const std::string& metric, bool minimize) {
  Comparison out;
  out.metric = metric;
  if (metrics.empty()) throw ArgumentError("compare: no runs given");
  if (metrics.size() == 1) out.warnings.push_back("only one run given; the table has a single source");

  using Key = std::tuple<std::string, std::string, std::string>;
  struct Cell {
    std::vector<double> values;
    std::set<std::string> seeds;
  };
  std::map<Key, std::map<double, Cell>> groups;
  for (std::size_t t = 0; t < metrics.size(); ++t) {
    const auto& table = metrics[t];
    std::vector<std::string> missing;
    for (const char* k : kKeyColumns) {
      if (!table.find_column(k)) missing.push_back(k);
    }
    if (!table.find_column(metric)) missing.push_back(metric);
    if (!missing.empty()) {
      std::string names;
      for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
      throw DataError("compare: run " + std::to_string(t + 1) + " has no column(s) " + names);
    }
    const auto c_seed = table.column("seed"), c_method = table.column("method"), c_setting = table.column("setting"),
               c_mod = table.column("modality"), c_lambda = table.column("lambda"), c_status = table.column("status"),
               c_metric = table.column(metric);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      const Key key{row[c_method], row[c_setting], row[c_mod]};
      const double lambda = io::parse_double(row[c_lambda], r, "lambda");
      Cell& cell = groups[key][lambda];
      cell.seeds.insert(row[c_seed]);
      if (row[c_status] != "ok" || row[c_metric].empty()) continue;
      const double v = io::parse_double(row[c_metric], r, metric);
      if (std::isfinite(v)) cell.values.push_back(v);
    }
  }

  std::set<double> all_lambdas;
  for (const auto& [key, by_lambda] : groups) {
    for (const auto& [l, cell] : by_lambda) all_lambdas.insert(l);
  }
  const std::vector<double> lambdas(all_lambdas.begin(), all_lambdas.end());
  out.chart.title = "mean " + metric + " by lambda";
  out.chart.y_label = metric;
  for (double l : lambdas) out.chart.categories.push_back(io::format_double(l));

  for (const auto& [key, by_lambda] : groups) {
    CompareRow row;
    std::tie(row.method, row.setting, row.modality) = key;
    bool found = false;
    std::vector<double> series(lambdas.size(), 0.0);
    for (const auto& [l, cell] : by_lambda) {
      if (cell.values.empty()) continue;
      double mean = 0.0;
      for (double v : cell.values) mean += v;
      mean /= static_cast<double>(cell.values.size());
      series[static_cast<std::size_t>(std::lower_bound(lambdas.begin(), lambdas.end(), l) - lambdas.begin())] = mean;
      if (!found || (minimize ? mean < row.mean : mean > row.mean)) {
        found = true;
        row.best_lambda = l;
        row.mean = mean;
        double ss = 0.0;
        for (double v : cell.values) ss += (v - mean) * (v - mean);
        row.stddev = cell.values.size() > 1 ? std::sqrt(ss / static_cast<double>(cell.values.size() - 1)) : 0.0;
        row.seeds = cell.values.size();
        row.seeds_total = cell.seeds.size();
      }
    }
    if (!found) {
      out.warnings.push_back(row.method + "/" + row.setting + "/" + row.modality + ": no completed values for " + metric);
      continue;
    }
    if (row.seeds < row.seeds_total) {
      out.warnings.push_back(row.method + "/" + row.setting + "/" + row.modality + ": " + std::to_string(row.seeds) +
                             " of " + std::to_string(row.seeds_total) + " seeds completed");
    }
    out.chart.series.push_back(row.method + " " + row.setting + " " + row.modality);
    out.chart.values.push_back(std::move(series));
    out.rows.push_back(std::move(row));
  }
  return out;
}

Comparison compare_runs(const std::vector<std::string>& run_dirs, const std::string& metric, bool minimize) {
  std::vector<io::CsvTable> tables;
  for (const auto& d : run_dirs) {
    const auto path = (std::filesystem::path(d) / "metrics.csv").string();
    if (!std::filesystem::exists(path)) throw DataError("compare: no metrics.csv in " + d);
    tables.push_back(io::read_csv(path));
  }
  return compare_metrics(tables, metric, minimize);
}

std::string comparison_csv(const Comparison& c) {
  io::CsvTable t;
  t.header = {"method", "setting", "modality", "best_lambda", "mean_" + c.metric, "std_" + c.metric, "seeds",
              "seeds_total"};
  for (const auto& r : c.rows) {
    t.rows.push_back({r.method, r.setting, r.modality, io::format_double(r.best_lambda), io::format_double(r.mean),
                      io::format_double(r.stddev), std::to_string(r.seeds), std::to_string(r.seeds_total)});
  }
  return io::render_csv(t);
}

}  // namespace disentangle
