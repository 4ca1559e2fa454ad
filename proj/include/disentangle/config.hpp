#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disentangle/posterior.hpp"
#include "disentangle/synth.hpp"

namespace disentangle {

enum class Method { indiseek, factorizedcl, infodisen, clip_only };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

enum class ImportanceProbe {
  uniform,   // M draws uniform on [-10, 10]^d
  test_set,  // the held-out test rows
};

// Layer widths for every learnable map. "layers" counts weight matrices.
struct Architecture {
  std::size_t width = 100;
  std::size_t layers = 5;
  std::size_t z_dim = 10;          // modality-specific representation p
  std::size_t shared_dim = 2;      // d_c learned in stage 1
  std::size_t posterior_width = 64;
  std::size_t posterior_layers = 3;
  Covariance posterior_covariance = Covariance::diagonal;
  std::size_t embed_dim = 16;      // InfoNCE embedding space of the capture term
  std::size_t embedder_layers = 2; // x embedder depth
};

struct ExperimentConfig {
  Method method = Method::indiseek;
  double lambda = 0.01;
  std::vector<double> lambda_grid;  // when non-empty, replaces lambda
  double tau = 0.1;
  std::size_t epochs = 2000;
  std::size_t batch_size = 128;
  double lr = 1e-4;
  std::size_t posterior_steps = 5;
  double posterior_lr = 0.0;  // 0: same as lr
  Architecture arch;
  std::vector<std::uint64_t> seeds{0};

  // Simulation mode: oracle shared features from the generator, no stage 1.
  bool stage1_skip = true;
  synth::Setting setting = synth::Setting::s1;
  std::size_t n_train = 10000;
  std::size_t n_test = 1000;

  // External paired data (stage1_skip = false).
  std::string data_path;
  std::string label_column = "label";
  double test_fraction = 0.2;

  std::size_t importance_probes = 1000;
  ImportanceProbe importance_probe = ImportanceProbe::uniform;
  std::size_t knn_k = 10;

  std::string run_id;
  std::string output_root = "results";
  std::size_t jobs = 0;  // 0: hardware concurrency
  bool write_checkpoints = true;

  std::vector<double> lambdas() const;
  void validate() const;
};

// Every key of ExperimentConfig in `key = value` form; '#' starts a comment.
// Lists are comma separated. Throws ConfigError on unknown keys or bad values.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);
std::string render_config(const ExperimentConfig& cfg);

// {10^j : j = -3..3}
std::vector<double> default_lambda_grid();

}  // namespace disentangle
