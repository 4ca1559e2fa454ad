#include "disentangle/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "disentangle/checkpoint.hpp"
#include "disentangle/error.hpp"
#include "disentangle/eval/importance.hpp"
#include "disentangle/eval/neighbors.hpp"
#include "disentangle/eval/probe.hpp"
#include "disentangle/io.hpp"
#include "disentangle/svg.hpp"
#include "disentangle/synth.hpp"

namespace disentangle {

std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::ok:
      return "ok";
    case CellStatus::diverged:
      return "diverged";
    case CellStatus::failed:
      return "failed";
  }
  return "?";
}

bool ResultBundle::any_diverged() const {
  for (const auto& c : cells) {
    if (c.status == CellStatus::diverged) return true;
  }
  return false;
}

bool ResultBundle::any_failed() const {
  for (const auto& c : cells) {
    if (c.status == CellStatus::failed) return true;
  }
  return false;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  if (jobs == 0) jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

namespace {

std::string lambda_tag(double l) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", l);
  return buf;
}

// Everything one seed needs for stage 2.
struct SeedData {
  std::uint64_t seed = 0;
  // Per modality: train/test inputs and their shared features.
  std::vector<std::string> modalities;
  std::vector<Matrix> x_train, x_test, c_train, c_test;
  std::optional<std::vector<std::string>> test_labels, train_labels;
  std::vector<std::size_t> ideal;  // simulation only
  std::vector<std::vector<double>> shared_importance;  // per modality
  std::shared_ptr<const SharedModel> shared;
  std::vector<std::uint64_t> shared_checksums;
  std::string error;
};

Matrix gather(const Matrix& m, const std::vector<std::size_t>& idx) { return gather_rows(m, idx); }

std::vector<int> label_ids(const std::vector<std::string>& labels, std::map<std::string, int>& dict) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto [it, inserted] = dict.try_emplace(l, static_cast<int>(dict.size()));
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> importance_of(const ExperimentConfig& cfg, const eval::RepresentationMap& psi,
                                  const Matrix& x_test, std::uint64_t seed, std::size_t modality) {
  if (cfg.importance_probe == ImportanceProbe::test_set) return eval::masking_importance(psi, x_test).zeta_hat;
  Prng rng = Prng(seed).stream(4 + modality);
  return eval::masking_importance(psi, x_test.cols(), cfg.importance_probes, rng).zeta_hat;
}

SeedData prepare_simulation(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedData s;
  s.seed = seed;
  Prng root(seed);
  Prng train_rng = root.stream(0);
  Prng test_rng = root.stream(1);
  auto train = synth::generate({cfg.setting, cfg.n_train, seed}, train_rng);
  auto test = synth::generate({cfg.setting, cfg.n_test, seed}, test_rng);
  s.modalities = {"x1"};
  s.ideal = train.ideal_specific_coords;
  s.x_train = {train.x1};
  s.c_train = {train.c1};
  s.x_test = {test.x1};
  s.c_test = {test.c1};
  const auto setting = cfg.setting;
  s.shared_importance = {importance_of(cfg, [setting](const Matrix& x) { return synth::oracle_shared(setting, x); },
                                       test.x1, seed, 0)};
  return s;
}

SeedData prepare_paired(const ExperimentConfig& cfg, const io::CsvDataset& ds, std::uint64_t seed) {
  SeedData s;
  s.seed = seed;
  Prng root(seed);
  Prng split_rng = root.stream(0);
  const std::size_t n = ds.modality_a.rows();
  const auto perm = permutation(split_rng, n);
  const auto n_test = static_cast<std::size_t>(std::ceil(cfg.test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) throw DataError("dataset too small for test_fraction");
  const std::vector<std::size_t> test_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  const std::vector<std::size_t> train_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  if (ds.labels) {
    std::vector<std::string> tr, te;
    for (auto i : train_idx) tr.push_back((*ds.labels)[i]);
    for (auto i : test_idx) te.push_back((*ds.labels)[i]);
    s.train_labels = std::move(tr);
    s.test_labels = std::move(te);
  }
  const Matrix a_tr = gather(ds.modality_a, train_idx);
  const Matrix a_te = gather(ds.modality_a, test_idx);

  if (cfg.stage1_skip) {
    if (!ds.shared) throw DataError("stage1_skip with external data needs c_* shared-feature columns");
    s.modalities = {"a"};
    s.x_train = {a_tr};
    s.x_test = {a_te};
    s.c_train = {gather(*ds.shared, train_idx)};
    s.c_test = {gather(*ds.shared, test_idx)};
    return s;
  }
  if (!ds.modality_b) throw DataError("two-modality training needs b_* columns");
  const Matrix b_tr = gather(*ds.modality_b, train_idx);
  const Matrix b_te = gather(*ds.modality_b, test_idx);
  Prng stage1_rng = root.stream(1);
  auto shared = std::make_shared<SharedModel>(train_shared(cfg, a_tr, b_tr, stage1_rng));
  s.modalities = {"a", "b"};
  s.x_train = {a_tr, b_tr};
  s.x_test = {a_te, b_te};
  s.c_train = {predict(shared->f1, a_tr), predict(shared->f2, b_tr)};
  s.c_test = {predict(shared->f1, a_te), predict(shared->f2, b_te)};
  s.shared_checksums = {parameter_checksum(shared->f1), parameter_checksum(shared->f2)};
  const MlpNet& f1 = shared->f1;
  const MlpNet& f2 = shared->f2;
  s.shared_importance = {importance_of(cfg, [&f1](const Matrix& x) { return predict(f1, x); }, a_te, seed, 0),
                         importance_of(cfg, [&f2](const Matrix& x) { return predict(f2, x); }, b_te, seed, 1)};
  s.shared = std::move(shared);
  return s;
}

nlohmann::json cell_metadata(const ExperimentConfig& cfg, const SeedData& s, std::size_t m, double lambda) {
  return {{"method", std::string(to_string(cfg.method))},
          {"lambda", lambda},
          {"seed", s.seed},
          {"modality", s.modalities[m]},
          {"input_dim", s.x_train[m].cols()},
          {"shared_dim", s.c_train[m].cols()},
          {"stage1_skip", cfg.stage1_skip},
          {"setting", cfg.stage1_skip && cfg.data_path.empty() ? std::string(synth::to_string(cfg.setting)) : "csv"},
          {"data", cfg.data_path},
          {"config", render_config(cfg)}};
}

std::vector<NamedNet> specific_nets(const SpecificModel& m) {
  std::vector<NamedNet> nets{{"h", m.h}};
  if (m.decoder) nets.push_back({"decoder", *m.decoder});
  if (m.posterior) {
    nets.push_back({"posterior_mean", m.posterior->mean_net});
    nets.push_back({"posterior_logvar", m.posterior->logvar_net});
    if (m.posterior->offdiag_net) nets.push_back({"posterior_offdiag", *m.posterior->offdiag_net});
  }
  if (m.fusion_head) nets.push_back({"fusion_head", *m.fusion_head});
  if (m.x_embedder) nets.push_back({"x_embedder", *m.x_embedder});
  if (m.projection) nets.push_back({"projection", *m.projection});
  return nets;
}

struct Unit {
  std::size_t seed_index;
  std::size_t modality;
  std::size_t lambda_index;
};

}  // namespace

std::string results_root(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("DISENTANGLE_RESULTS_DIR"); env && *env) return env;
  return cfg.output_root;
}

std::string default_run_id(const ExperimentConfig& cfg, const std::string& timestamp) {
  const std::string setting =
      cfg.stage1_skip && cfg.data_path.empty() ? std::string(synth::to_string(cfg.setting)) : "csv";
  const auto lambdas = cfg.lambdas();
  const std::string lam = lambdas.size() == 1 ? lambda_tag(lambdas.front()) : "grid";
  return std::string(to_string(cfg.method)) + "_" + setting + "_" + lam + "_" + timestamp;
}

ResultBundle run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  ResultBundle bundle;
  bundle.config = cfg;
  bundle.run_dir = opts.run_dir;
  const bool simulation = cfg.stage1_skip && cfg.data_path.empty();
  std::optional<io::CsvDataset> dataset;
  if (!simulation) dataset = io::load_dataset(cfg.data_path, cfg.label_column);
  const bool checkpoints = cfg.write_checkpoints && !opts.run_dir.empty();
  const std::filesystem::path ckpt_dir = std::filesystem::path(opts.run_dir) / "checkpoints";

  // Stage 0/1: data and shared encoders per seed.
  std::vector<SeedData> seeds(cfg.seeds.size());
  parallel_for(seeds.size(), cfg.jobs, [&](std::size_t i) {
    const auto seed = cfg.seeds[i];
    try {
      seeds[i] = simulation ? prepare_simulation(cfg, seed) : prepare_paired(cfg, *dataset, seed);
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      seeds[i].seed = seed;
      seeds[i].error = e.what();
      seeds[i].modalities = {dataset && dataset->modality_b && !cfg.stage1_skip ? "shared" : "x1"};
    }
    if (checkpoints && seeds[i].shared) {
      write_checkpoint(ckpt_dir / ("seed" + std::to_string(seed) + "_shared.ckpt"),
                       {{"f1", seeds[i].shared->f1}, {"f2", seeds[i].shared->f2}},
                       {{"method", std::string(to_string(cfg.method))}, {"seed", seed}, {"stage", "shared"},
                        {"data", cfg.data_path}, {"config", render_config(cfg)}});
    }
  });
  for (const auto& s : seeds) bundle.shared.push_back(s.shared);

  if (cfg.method == Method::clip_only) {
    for (const auto& s : seeds) {
      CellResult cell;
      cell.seed = s.seed;
      cell.modality = s.shared ? "shared" : s.modalities.front();
      cell.lambda = 0.0;
      if (!s.error.empty()) {
        cell.status = CellStatus::failed;
        cell.error = s.error;
      } else {
        if (s.shared) cell.shared_trace = s.shared->loss_trace;
        if (!s.shared_importance.empty()) cell.shared_importance = s.shared_importance.front();
        if (s.test_labels && s.c_train.size() == 2) {
          std::map<std::string, int> dict;
          const auto ytr = label_ids(*s.train_labels, dict);
          const auto yte = label_ids(*s.test_labels, dict);
          cell.probe_accuracy = eval::linear_probe(hconcat(s.c_train[0], s.c_train[1]), ytr,
                                                   hconcat(s.c_test[0], s.c_test[1]), yte)
                                    .accuracy;
        }
      }
      bundle.cells.push_back(std::move(cell));
    }
    if (!opts.run_dir.empty()) write_bundle(bundle, opts.run_dir);
    return bundle;
  }

  // Stage 2: one unit per (seed, modality, lambda).
  const auto lambdas = cfg.lambdas();
  std::vector<Unit> units;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    for (std::size_t m = 0; m < seeds[si].modalities.size(); ++m) {
      for (std::size_t li = 0; li < lambdas.size(); ++li) units.push_back({si, m, li});
    }
  }
  std::vector<CellResult> cells(units.size());
  std::vector<Matrix> z_test(units.size()), z_train(units.size());
  parallel_for(units.size(), cfg.jobs, [&](std::size_t u) {
    const auto& [si, m, li] = units[u];
    const SeedData& s = seeds[si];
    CellResult& cell = cells[u];
    cell.seed = s.seed;
    cell.modality = s.modalities[m];
    cell.lambda = lambdas[li];
    if (!s.error.empty()) {
      cell.status = CellStatus::failed;
      cell.error = s.error;
      return;
    }
    if (m == 0 && li == 0 && s.shared) cell.shared_trace = s.shared->loss_trace;
    cell.shared_importance = s.shared_importance.empty() ? std::vector<double>{} : s.shared_importance[m];
    Prng rng = Prng(s.seed).stream(8 + 64 * m + li);
    std::vector<EpochLog> partial;
    try {
      auto model = std::make_shared<SpecificModel>(train_specific(
          cfg, cell.lambda, s.x_train[m], s.c_train[m], rng,
          [&partial](const EpochLog& log, const MlpNet&) { partial.push_back(log); }));
      cell.history = model->history;
      const MlpNet& h = model->h;
      const eval::RepresentationMap psi = [&h](const Matrix& x) { return predict(h, x); };
      try {
        cell.importance = importance_of(cfg, psi, s.x_test[m], s.seed, m);
      } catch (const DegenerateInputError&) {
        cell.importance.assign(s.x_test[m].cols(), std::nan(""));
      }
      if (!s.ideal.empty() && std::isfinite(cell.importance.front())) {
        double ideal = 0.0;
        for (auto j : s.ideal) ideal += cell.importance[j];
        cell.nonideal_importance = 1.0 - ideal;
      }
      z_train[u] = predict(h, s.x_train[m]);
      z_test[u] = predict(h, s.x_test[m]);
      if (s.test_labels) {
        std::map<std::string, int> dict;
        const auto ytr = label_ids(*s.train_labels, dict);
        const auto yte = label_ids(*s.test_labels, dict);
        cell.probe_accuracy =
            eval::linear_probe(hconcat(s.c_train[m], z_train[u]), ytr, hconcat(s.c_test[m], z_test[u]), yte).accuracy;
      }
      if (checkpoints) {
        write_checkpoint(ckpt_dir / ("seed" + std::to_string(s.seed) + "_" + cell.modality + "_lambda" +
                                     lambda_tag(cell.lambda) + ".ckpt"),
                         specific_nets(*model), cell_metadata(cfg, s, m, cell.lambda));
      }
      cell.model = std::move(model);
    } catch (const IoError&) {
      throw;
    } catch (const DivergenceError& e) {
      cell.status = CellStatus::diverged;
      cell.error = e.what();
      cell.history = std::move(partial);
    } catch (const std::exception& e) {
      cell.status = CellStatus::failed;
      cell.error = e.what();
      cell.history = std::move(partial);
    }
  });

  // Joint metrics across the two modalities of one (seed, lambda).
  for (std::size_t u = 0; u < units.size(); ++u) {
    const auto& [si, m, li] = units[u];
    const SeedData& s = seeds[si];
    if (s.shared) {
      cells[u].stage_separation = parameter_checksum(s.shared->f1) == s.shared_checksums[0] &&
                                  parameter_checksum(s.shared->f2) == s.shared_checksums[1];
    }
    if (m != 1 || !s.test_labels) continue;
    const std::size_t ua = u - lambdas.size();  // modality a, same lambda
    if (cells[u].status != CellStatus::ok || cells[ua].status != CellStatus::ok) continue;
    const auto k = std::min(cfg.knn_k, z_test[u].rows() - 1);
    const auto theta = eval::knn_theta(z_test[ua], z_test[u], *s.test_labels, k);
    double sum = 0.0;
    for (const auto& ns : theta.per_sample) sum += ns.theta;
    const double mean = sum / static_cast<double>(theta.per_sample.size());
    for (auto* cell : {&cells[ua], &cells[u]}) {
      cell->mean_theta = mean;
      for (const auto& lt : theta.ranking) cell->theta_ranking.emplace_back(lt.label, lt.mean_theta);
    }
    std::map<std::string, int> dict;
    const auto ytr = label_ids(*s.train_labels, dict);
    const auto yte = label_ids(*s.test_labels, dict);
    const Matrix ftr = hconcat(hconcat(s.c_train[0], z_train[ua]), hconcat(s.c_train[1], z_train[u]));
    const Matrix fte = hconcat(hconcat(s.c_test[0], z_test[ua]), hconcat(s.c_test[1], z_test[u]));
    CellResult joint;
    joint.seed = s.seed;
    joint.modality = "ab";
    joint.lambda = cells[u].lambda;
    joint.probe_accuracy = eval::linear_probe(ftr, ytr, fte, yte).accuracy;
    joint.mean_theta = mean;
    joint.stage_separation = cells[u].stage_separation;
    bundle.cells.push_back(std::move(joint));
  }
  // Stable order: seed, modality, lambda.
  for (auto& c : cells) bundle.cells.push_back(std::move(c));
  std::stable_sort(bundle.cells.begin(), bundle.cells.end(), [&](const CellResult& a, const CellResult& b) {
    auto seed_pos = [&](std::uint64_t sd) {
      return std::find(cfg.seeds.begin(), cfg.seeds.end(), sd) - cfg.seeds.begin();
    };
    if (a.seed != b.seed) return seed_pos(a.seed) < seed_pos(b.seed);
    if (a.modality != b.modality) return a.modality < b.modality;
    return a.lambda < b.lambda;
  });
  if (!opts.run_dir.empty()) write_bundle(bundle, opts.run_dir);
  return bundle;
}

namespace {

std::string opt_num(const std::optional<double>& v) { return v ? io::format_double(*v) : ""; }

std::size_t max_dim(const ResultBundle& b, bool shared) {
  std::size_t d = 0;
  for (const auto& c : b.cells) d = std::max(d, (shared ? c.shared_importance : c.importance).size());
  return d;
}

std::string setting_name(const ExperimentConfig& cfg) {
  return cfg.stage1_skip && cfg.data_path.empty() ? std::string(synth::to_string(cfg.setting)) : "csv";
}

}  // namespace

std::string metrics_csv(const ResultBundle& bundle) {
  const std::size_t d = max_dim(bundle, false);
  const std::size_t ds = max_dim(bundle, true);
  io::CsvTable t;
  t.header = {"seed", "method", "setting", "modality", "lambda", "status", "epochs", "final_total",
              "final_entanglement", "final_capture"};
  for (std::size_t j = 0; j < d; ++j) t.header.push_back("imp_" + std::to_string(j + 1));
  for (std::size_t j = 0; j < ds; ++j) t.header.push_back("shared_imp_" + std::to_string(j + 1));
  for (const char* h : {"nonideal_importance", "probe_accuracy", "mean_theta", "final_shared_infonce",
                        "stage_separation", "error"}) {
    t.header.push_back(h);
  }
  for (const auto& c : bundle.cells) {
    std::vector<std::string> r{std::to_string(c.seed), std::string(to_string(bundle.config.method)),
                               setting_name(bundle.config), c.modality, io::format_double(c.lambda),
                               std::string(to_string(c.status)), std::to_string(c.history.size())};
    if (c.history.empty()) {
      r.insert(r.end(), {"", "", ""});
    } else {
      const auto& rep = c.history.back().report;
      r.push_back(io::format_double(rep.total));
      r.push_back(io::format_double(rep.entanglement_term));
      r.push_back(io::format_double(rep.capture_term));
    }
    for (std::size_t j = 0; j < d; ++j) r.push_back(j < c.importance.size() ? io::format_double(c.importance[j]) : "");
    for (std::size_t j = 0; j < ds; ++j) {
      r.push_back(j < c.shared_importance.size() ? io::format_double(c.shared_importance[j]) : "");
    }
    r.push_back(opt_num(c.nonideal_importance));
    r.push_back(opt_num(c.probe_accuracy));
    r.push_back(opt_num(c.mean_theta));
    r.push_back(c.shared_trace.empty() ? "" : io::format_double(c.shared_trace.back()));
    r.push_back(c.stage_separation ? (*c.stage_separation ? "true" : "false") : "");
    r.push_back(c.error);
    t.rows.push_back(std::move(r));
  }
  return io::render_csv(t);
}

std::string losses_csv(const ResultBundle& bundle) {
  io::CsvTable t;
  t.header = {"seed", "modality", "lambda", "stage", "epoch", "total", "entanglement", "capture"};
  for (const auto& c : bundle.cells) {
    for (std::size_t e = 0; e < c.shared_trace.size(); ++e) {
      const auto v = io::format_double(c.shared_trace[e]);
      t.rows.push_back({std::to_string(c.seed), "shared", "", "shared", std::to_string(e), v, "", v});
    }
    for (const auto& log : c.history) {
      t.rows.push_back({std::to_string(c.seed), c.modality, io::format_double(c.lambda), "specific",
                        std::to_string(log.epoch), io::format_double(log.report.total),
                        io::format_double(log.report.entanglement_term), io::format_double(log.report.capture_term)});
    }
  }
  return io::render_csv(t);
}

namespace {

struct Moments {
  std::vector<double> mean, sd;
  std::size_t count = 0;
};

Moments moments(const std::vector<const std::vector<double>*>& rows) {
  Moments m;
  if (rows.empty()) return m;
  const std::size_t d = rows.front()->size();
  m.mean.assign(d, 0.0);
  m.sd.assign(d, 0.0);
  m.count = rows.size();
  for (const auto* r : rows) {
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += (*r)[j];
  }
  for (double& v : m.mean) v /= static_cast<double>(rows.size());
  if (rows.size() > 1) {
    for (const auto* r : rows) {
      for (std::size_t j = 0; j < d; ++j) m.sd[j] += ((*r)[j] - m.mean[j]) * ((*r)[j] - m.mean[j]);
    }
    for (double& v : m.sd) v = std::sqrt(v / static_cast<double>(rows.size() - 1));
  }
  return m;
}

}  // namespace

void write_bundle(const ResultBundle& bundle, const std::string& dir) {
  const std::filesystem::path root(dir);
  io::write_text((root / "metrics.csv").string(), metrics_csv(bundle));
  io::write_text((root / "losses.csv").string(), losses_csv(bundle));
  io::write_text((root / "config.txt").string(), render_config(bundle.config));

  // Mean importance per (modality, lambda) over completed seeds.
  std::map<std::pair<std::string, double>, std::vector<const std::vector<double>*>> groups, shared_groups;
  for (const auto& c : bundle.cells) {
    if (c.status != CellStatus::ok) continue;
    if (!c.importance.empty() && std::isfinite(c.importance.front())) {
      groups[{c.modality, c.lambda}].push_back(&c.importance);
    }
    if (!c.shared_importance.empty()) shared_groups[{c.modality, c.lambda}].push_back(&c.shared_importance);
  }
  const std::string method(to_string(bundle.config.method));
  const std::string setting = setting_name(bundle.config);
  io::CsvTable summary;
  summary.header = {"modality", "lambda", "kind", "seeds", "coordinate", "mean", "std"};
  auto emit = [&](const auto& g, const std::string& kind) {
    for (const auto& [key, rows] : g) {
      const auto m = moments(rows);
      for (std::size_t j = 0; j < m.mean.size(); ++j) {
        summary.rows.push_back({key.first, io::format_double(key.second), kind, std::to_string(m.count),
                                std::to_string(j + 1), io::format_double(m.mean[j]), io::format_double(m.sd[j])});
      }
      std::string title = method + " " + setting + " " + key.first;
      std::string file = "importance_" + key.first;
      if (kind == "specific") {
        title += " lambda=" + lambda_tag(key.second);
        file += "_lambda" + lambda_tag(key.second);
      } else {
        title += " shared";
        file += "_shared";
      }
      title += " (" + std::to_string(m.count) + " seeds)";
      io::write_text((root / (file + ".svg")).string(), svg::render(svg::importance_chart(title, m.mean, m.sd)));
    }
  };
  emit(groups, "specific");
  // The shared map does not depend on lambda; chart it once per modality.
  std::map<std::pair<std::string, double>, std::vector<const std::vector<double>*>> shared_once;
  for (const auto& [key, rows] : shared_groups) {
    if (!shared_once.count({key.first, 0.0})) shared_once[{key.first, 0.0}] = rows;
  }
  emit(shared_once, "shared");
  io::write_text((root / "summary.csv").string(), io::render_csv(summary));

  for (const auto& c : bundle.cells) {
    if (c.theta_ranking.empty() || c.modality != "a") continue;
    io::CsvTable t;
    t.header = {"rank", "label", "mean_theta"};
    for (std::size_t i = 0; i < c.theta_ranking.size(); ++i) {
      t.rows.push_back({std::to_string(i + 1), c.theta_ranking[i].first, io::format_double(c.theta_ranking[i].second)});
    }
    io::write_csv((root / ("theta_seed" + std::to_string(c.seed) + "_lambda" + lambda_tag(c.lambda) + ".csv")).string(),
                  t);
  }
}

}  // namespace disentangle
