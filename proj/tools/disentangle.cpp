// disentangle: synthetic data, training runs, evaluation and run comparison.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "disentangle/checkpoint.hpp"
#include "disentangle/compare.hpp"
#include "disentangle/config.hpp"
#include "disentangle/error.hpp"
#include "disentangle/eval/importance.hpp"
#include "disentangle/eval/neighbors.hpp"
#include "disentangle/eval/probe.hpp"
#include "disentangle/experiment.hpp"
#include "disentangle/io.hpp"
#include "disentangle/svg.hpp"
#include "disentangle/synth.hpp"

namespace fs = std::filesystem;
using namespace disentangle;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string setting;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  std::string out = "-";
};

int cmd_synth(const SynthArgs& a) {
  const auto setting = synth::parse_setting(a.setting);
  if (!setting) throw ConfigError("unknown setting '" + a.setting + "'; valid settings: s1, s2, s3, s4");
  if (a.n == 0) throw ConfigError("--n must be >= 1");
  const auto batch = synth::generate({*setting, a.n, a.seed});
  io::CsvTable t;
  io::append_columns(t, batch.x1, {"x1", "x2", "x3", "x4", "x5", "x6"});
  io::append_columns(t, batch.c1, {"c1", "c2"});
  if (a.out == "-") {
    std::cout << io::render_csv(t);
  } else {
    io::write_csv(a.out, t);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::string> method, setting, data, label_column, run_id, output_root, importance_probe;
  std::optional<double> lambda, tau, lr;
  std::optional<std::string> lambda_grid;
  bool lambda_grid_flag = false;
  std::optional<std::size_t> epochs, batch_size, seeds, jobs, n_train, n_test, width, layers, z_dim;
  std::optional<std::string> seed_list;
  bool no_checkpoints = false;
  bool two_modality = false;
};

ExperimentConfig build_config(const TrainArgs& a) {
  ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : load_config(a.config);
  auto set = [&](const char* key, const std::string& v) { apply_setting(cfg, key, v); };
  auto num = [](double v) { return io::format_double(v); };
  if (a.method) set("method", *a.method);
  if (a.setting) set("setting", *a.setting);
  if (a.data) set("data", *a.data);
  if (a.two_modality || (a.data && !a.setting)) set("stage1_skip", "false");
  if (a.label_column) set("label_column", *a.label_column);
  if (a.lambda) set("lambda", num(*a.lambda));
  if (a.lambda_grid_flag) set("lambda_grid", a.lambda_grid && !a.lambda_grid->empty() ? *a.lambda_grid : "default");
  if (a.tau) set("tau", num(*a.tau));
  if (a.lr) set("lr", num(*a.lr));
  if (a.epochs) set("epochs", std::to_string(*a.epochs));
  if (a.batch_size) set("batch_size", std::to_string(*a.batch_size));
  if (a.seeds) set("seed_count", std::to_string(*a.seeds));
  if (a.seed_list) set("seeds", *a.seed_list);
  if (a.jobs) set("jobs", std::to_string(*a.jobs));
  if (a.n_train) set("n_train", std::to_string(*a.n_train));
  if (a.n_test) set("n_test", std::to_string(*a.n_test));
  if (a.width) set("width", std::to_string(*a.width));
  if (a.layers) set("layers", std::to_string(*a.layers));
  if (a.z_dim) set("z_dim", std::to_string(*a.z_dim));
  if (a.importance_probe) set("importance_probe", *a.importance_probe);
  if (a.run_id) set("run_id", *a.run_id);
  if (a.output_root) set("output_root", *a.output_root);
  if (a.no_checkpoints) set("checkpoints", "false");
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

int cmd_train(const TrainArgs& a) {
  const ExperimentConfig cfg = build_config(a);
  const std::string run_id = cfg.run_id.empty() ? default_run_id(cfg, utc_timestamp()) : cfg.run_id;
  const std::string dir = (fs::path(results_root(cfg)) / run_id).string();
  std::cerr << "run " << run_id << ": " << cfg.seeds.size() << " seed(s), " << cfg.lambdas().size()
            << " lambda value(s), output " << dir << "\n";
  const auto t0 = std::chrono::steady_clock::now();
  const auto bundle = run_experiment(cfg, {dir});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::map<std::pair<std::string, double>, std::pair<std::vector<double>, std::size_t>> means;
  for (const auto& c : bundle.cells) {
    if (c.status != CellStatus::ok) {
      std::cerr << "seed " << c.seed << " " << c.modality << " lambda " << c.lambda << ": " << to_string(c.status)
                << ": " << c.error << "\n";
      continue;
    }
    const auto& imp = c.importance.empty() ? c.shared_importance : c.importance;
    if (imp.empty() || !std::isfinite(imp.front())) continue;
    auto& [sum, n] = means[{c.modality, c.lambda}];
    sum.resize(imp.size(), 0.0);
    for (std::size_t j = 0; j < imp.size(); ++j) sum[j] += imp[j];
    ++n;
  }
  for (const auto& [key, acc] : means) {
    std::printf("%s lambda=%g importance (mean of %zu):", key.first.c_str(), key.second, acc.second);
    for (double v : acc.first) std::printf(" %.4f", v / static_cast<double>(acc.second));
    std::printf("\n");
  }
  std::printf("wrote %s (%.1fs)\n", dir.c_str(), secs);
  if (bundle.any_diverged()) return kExitDivergence;
  return bundle.any_failed() ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string checkpoint_b;
  std::string data;
  std::vector<std::string> metrics;
  std::string net = "h";
  std::string label_column = "label";
  std::string importance_probe = "uniform";
  std::size_t probes = eval::kDefaultProbes;
  std::size_t k = 10;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  std::string out = ".";
};

Matrix encode(const MlpNet& net, const Matrix& x, const std::string& what) {
  if (x.cols() != net.input_dim()) {
    throw DataError(what + " has " + std::to_string(x.cols()) + " input columns but the checkpoint net expects " +
                    std::to_string(net.input_dim()));
  }
  return predict(net, x);
}

int cmd_eval(const EvalArgs& a) {
  const auto nets = read_checkpoint(a.checkpoint);
  const MlpNet& net = find_net(nets, a.net);
  std::optional<io::CsvDataset> ds;
  if (!a.data.empty()) ds = io::load_dataset(a.data, a.label_column);
  fs::create_directories(a.out);
  const fs::path out(a.out);

  for (const auto& metric : a.metrics) {
    if (metric == "importance") {
      eval::ImportanceProfile prof;
      const eval::RepresentationMap psi = [&net](const Matrix& x) { return predict(net, x); };
      if (a.importance_probe == "test_set") {
        if (!ds) throw ConfigError("--importance-probe test_set needs --data");
        prof = eval::masking_importance(psi, ds->modality_a.cols() == net.input_dim()
                                                 ? ds->modality_a
                                                 : throw DataError("data columns do not match the net input"));
      } else if (a.importance_probe == "uniform") {
        Prng rng(a.seed);
        prof = eval::masking_importance(psi, net.input_dim(), a.probes, rng);
      } else {
        throw ConfigError("--importance-probe must be uniform or test_set");
      }
      io::CsvTable t;
      t.header = {"coordinate", "importance", "raw"};
      for (std::size_t j = 0; j < prof.zeta_hat.size(); ++j) {
        t.rows.push_back({std::to_string(j + 1), io::format_double(prof.zeta_hat[j]), io::format_double(prof.raw_zeta[j])});
      }
      io::write_csv((out / "importance.csv").string(), t);
      io::write_text((out / "importance.svg").string(),
                     svg::render(svg::importance_chart(fs::path(a.checkpoint).filename().string(), prof.zeta_hat)));
      std::printf("importance:");
      for (double v : prof.zeta_hat) std::printf(" %.4f", v);
      std::printf("\n");
    } else if (metric == "knn-theta") {
      if (!ds || !ds->labels) throw DataError("knn-theta needs --data with a label column");
      if (!ds->modality_b) throw DataError("knn-theta needs b_* columns for the second modality");
      if (a.checkpoint_b.empty()) throw ConfigError("knn-theta needs --checkpoint-b for the second modality");
      const auto nets_b = read_checkpoint(a.checkpoint_b);
      const Matrix za = encode(net, ds->modality_a, "modality a");
      const Matrix zb = encode(find_net(nets_b, a.net), *ds->modality_b, "modality b");
      const auto res = eval::knn_theta(za, zb, *ds->labels, a.k);
      io::CsvTable t;
      t.header = {"rank", "label", "mean_theta", "count"};
      for (std::size_t i = 0; i < res.ranking.size(); ++i) {
        const auto& r = res.ranking[i];
        t.rows.push_back({std::to_string(i + 1), r.label, io::format_double(r.mean_theta), std::to_string(r.count)});
      }
      io::write_csv((out / "theta_ranking.csv").string(), t);
      for (std::size_t i = 0; i < res.ranking.size(); ++i) {
        std::printf("%zu %s %.6f\n", i + 1, res.ranking[i].label.c_str(), res.ranking[i].mean_theta);
      }
    } else if (metric == "probe") {
      if (!ds || !ds->labels) throw DataError("probe needs --data with a label column");
      Matrix features = encode(net, ds->modality_a, "modality a");
      if (ds->shared) features = hconcat(*ds->shared, features);
      std::map<std::string, int> dict;
      std::vector<int> y;
      for (const auto& l : *ds->labels) y.push_back(dict.try_emplace(l, static_cast<int>(dict.size())).first->second);
      Prng rng(a.seed);
      const auto res = eval::linear_probe(features, y, a.test_fraction, rng);
      std::printf("probe accuracy %.6f (%zu classes, %zu iterations%s)\n", res.accuracy, res.classes, res.iterations,
                  res.converged ? "" : ", not converged");
    } else {
      throw ConfigError("unknown metric '" + metric + "' (importance, knn-theta, probe)");
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> runs;
  std::string metric = "probe_accuracy";
  bool minimize = false;
  std::string out = ".";
};

int cmd_compare(const CompareArgs& a) {
  const auto cmp = compare_runs(a.runs, a.metric, a.minimize);
  for (const auto& w : cmp.warnings) std::cerr << "warning: " << w << "\n";
  const std::string csv = comparison_csv(cmp);
  fs::create_directories(a.out);
  io::write_text((fs::path(a.out) / "comparison.csv").string(), csv);
  if (!cmp.chart.values.empty()) io::write_text((fs::path(a.out) / "comparison.svg").string(), svg::render(cmp.chart));
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disentangled multimodal representation learning: simulation, training and evaluation"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic batch (x1..x6, c1, c2) as CSV");
  synth_cmd->add_option("--setting", sa.setting, "s1, s2, s3 or s4")->required();
  synth_cmd->add_option("--n", sa.n, "Number of rows");
  synth_cmd->add_option("--seed", sa.seed, "PRNG seed");
  synth_cmd->add_option("--out,-o", sa.out, "Output path, '-' for stdout");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train and evaluate every seed x lambda cell of a run");
  train_cmd->add_option("--config,-c", ta.config, "key = value config file");
  train_cmd->add_option("--set", ta.sets, "Extra key=value config override (repeatable)");
  train_cmd->add_option("--method", ta.method, "indiseek, factorizedcl, infodisen or clip");
  train_cmd->add_option("--setting", ta.setting, "Simulation setting s1..s4");
  train_cmd->add_option("--data", ta.data, "Paired CSV (a_*, b_* columns, optional label)");
  train_cmd->add_flag("--two-modality", ta.two_modality, "Learn shared encoders from --data (stage 1)");
  train_cmd->add_option("--label-column", ta.label_column, "Label column name in --data");
  train_cmd->add_option("--lambda", ta.lambda, "Capture weight");
  train_cmd->add_option("--lambda-grid", ta.lambda_grid, "Comma separated lambdas; bare flag for 1e-3..1e3")
      ->expected(0, 1)
      ->each([&](const std::string&) { ta.lambda_grid_flag = true; });
  train_cmd->add_option("--tau", ta.tau, "InfoNCE temperature");
  train_cmd->add_option("--lr", ta.lr, "Adam learning rate");
  train_cmd->add_option("--epochs", ta.epochs, "Training epochs");
  train_cmd->add_option("--batch-size", ta.batch_size, "Minibatch size");
  train_cmd->add_option("--seeds", ta.seeds, "Number of seeds (0..N-1)");
  train_cmd->add_option("--seed-list", ta.seed_list, "Explicit comma separated seeds");
  train_cmd->add_option("--jobs,-j", ta.jobs, "Worker threads (default: logical cores)");
  train_cmd->add_option("--n-train", ta.n_train, "Simulation training rows");
  train_cmd->add_option("--n-test", ta.n_test, "Simulation test rows");
  train_cmd->add_option("--width", ta.width, "Hidden width of every MLP");
  train_cmd->add_option("--layers", ta.layers, "Weight matrices per encoder and decoder");
  train_cmd->add_option("--z-dim", ta.z_dim, "Specific representation dimension");
  train_cmd->add_option("--importance-probe", ta.importance_probe, "uniform or test_set");
  train_cmd->add_option("--run-id", ta.run_id, "Pin the run directory name");
  train_cmd->add_option("--output-root", ta.output_root, "Results root (DISENTANGLE_RESULTS_DIR wins)");
  train_cmd->add_flag("--no-checkpoints", ta.no_checkpoints, "Skip writing network checkpoints");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--checkpoint-b", ea.checkpoint_b, "Second-modality checkpoint (knn-theta)");
  eval_cmd->add_option("--data", ea.data, "CSV data");
  eval_cmd->add_option("--metric", ea.metrics, "importance, knn-theta or probe (repeatable)")->required();
  eval_cmd->add_option("--net", ea.net, "Network name inside the checkpoint");
  eval_cmd->add_option("--label-column", ea.label_column, "Label column name");
  eval_cmd->add_option("--importance-probe", ea.importance_probe, "uniform or test_set");
  eval_cmd->add_option("--probes", ea.probes, "Uniform probe count");
  eval_cmd->add_option("--k", ea.k, "Neighbours for knn-theta");
  eval_cmd->add_option("--test-fraction", ea.test_fraction, "Held-out fraction for the probe");
  eval_cmd->add_option("--seed", ea.seed, "PRNG seed for probes and splits");
  eval_cmd->add_option("--out,-o", ea.out, "Output directory");

  CompareArgs ca;
  auto* compare_cmd = app.add_subcommand("compare", "Max-over-lambda table across run directories");
  compare_cmd->add_option("runs", ca.runs, "Run directories")->required();
  compare_cmd->add_option("--metric", ca.metric, "metrics.csv column to aggregate");
  compare_cmd->add_flag("--minimize", ca.minimize, "Select the lambda with the smallest mean");
  compare_cmd->add_option("--out,-o", ca.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth_cmd) return cmd_synth(sa);
    if (*train_cmd) return cmd_train(ta);
    if (*eval_cmd) return cmd_eval(ea);
    if (*compare_cmd) return cmd_compare(ca);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged at epoch " << e.epoch() << " (entanglement " << e.entanglement() << ", capture "
              << e.capture() << "): " << e.what() << "\n";
    return kExitDivergence;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
