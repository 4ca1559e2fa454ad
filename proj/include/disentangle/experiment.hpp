#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "disentangle/config.hpp"
#include "disentangle/pipeline.hpp"

namespace disentangle {

enum class CellStatus { ok, diverged, failed };
std::string_view to_string(CellStatus s);

// One (seed, modality, lambda) cell of a run.
struct CellResult {
  std::uint64_t seed = 0;
  std::string modality;  // "x1" in simulation, "a"/"b" for paired data
  double lambda = 0.0;
  CellStatus status = CellStatus::ok;
  std::string error;

  std::vector<EpochLog> history;        // stage 2
  std::vector<double> shared_trace;     // stage 1 InfoNCE per epoch (first cell of a seed)
  std::vector<double> importance;       // zeta_hat of h, empty when unavailable
  std::vector<double> shared_importance;  // zeta_hat of the shared map
  std::optional<double> nonideal_importance;  // simulation: mass off the ideal coordinates
  std::optional<double> probe_accuracy;
  std::optional<double> mean_theta;     // kNN log-ratio between modalities a and b
  std::vector<std::pair<std::string, double>> theta_ranking;
  std::optional<bool> stage_separation;  // f checksum unchanged through stage 2

  std::shared_ptr<const SpecificModel> model;  // null for CLIP-only or failed cells
};

struct ResultBundle {
  ExperimentConfig config;
  std::string run_id;
  std::string run_dir;  // empty when nothing was written
  std::vector<CellResult> cells;  // ordered by seed, then modality, then lambda
  // Stage-1 encoders per seed (paired data only), in cfg.seeds order.
  std::vector<std::shared_ptr<const SharedModel>> shared;

  bool any_diverged() const;
  bool any_failed() const;
};

struct RunOptions {
  // Output directory; empty to keep everything in memory.
  std::string run_dir;
};

// Trains every cell (parallel across cfg.jobs workers), evaluates, and when
// run_dir is set writes metrics.csv, losses.csv, checkpoints and SVG charts
// there. A cell that diverges or throws is recorded with its status; the
// others still complete and are written.
ResultBundle run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

// metrics.csv and losses.csv contents, deterministic for a given bundle.
std::string metrics_csv(const ResultBundle& bundle);
std::string losses_csv(const ResultBundle& bundle);
void write_bundle(const ResultBundle& bundle, const std::string& dir);

// "<method>_<setting>_<lambda>_<timestamp>"; the setting slot reads "csv"
// for external data and the lambda slot "grid" for a lambda grid.
std::string default_run_id(const ExperimentConfig& cfg, const std::string& timestamp);
// Output root: DISENTANGLE_RESULTS_DIR when set, else cfg.output_root.
std::string results_root(const ExperimentConfig& cfg);

// Runs body(i) for i in [0, n) on up to `jobs` threads (0: hardware
// concurrency). The first exception thrown by a body is rethrown after all
// workers stop.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& body);

}  // namespace disentangle
