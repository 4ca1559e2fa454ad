#include "disentangle/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "disentangle/error.hpp"

namespace disentangle {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::indiseek:
      return "indiseek";
    case Method::factorizedcl:
      return "factorizedcl";
    case Method::infodisen:
      return "infodisen";
    case Method::clip_only:
      return "clip";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "indiseek") return Method::indiseek;
  if (name == "factorizedcl" || name == "factorized" || name == "fcl") return Method::factorizedcl;
  if (name == "infodisen" || name == "disen") return Method::infodisen;
  if (name == "clip" || name == "clip_only" || name == "cliponly") return Method::clip_only;
  return std::nullopt;
}

std::vector<double> default_lambda_grid() {
  return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
}

std::vector<double> ExperimentConfig::lambdas() const {
  if (method == Method::clip_only) return {0.0};
  return lambda_grid.empty() ? std::vector<double>{lambda} : lambda_grid;
}

void ExperimentConfig::validate() const {
  if (method != Method::clip_only) {
    for (double l : lambdas()) {
      if (!(l > 0.0)) throw ConfigError("lambda must be > 0 for method " + std::string(to_string(method)));
    }
  }
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (!(posterior_lr >= 0.0)) throw ConfigError("posterior_lr must be >= 0");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (arch.width == 0 || arch.layers == 0 || arch.z_dim == 0 || arch.shared_dim == 0 ||
      arch.posterior_width == 0 || arch.posterior_layers == 0 || arch.embed_dim == 0 ||
      arch.embedder_layers == 0) {
    throw ConfigError("architecture sizes must be >= 1");
  }
  if (stage1_skip) {
    if (n_train < batch_size) throw ConfigError("n_train must be >= batch_size");
    if (n_test == 0) throw ConfigError("n_test must be >= 1");
  } else if (data_path.empty()) {
    throw ConfigError("data path is required when stage1_skip is false");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  if (importance_probes == 0) throw ConfigError("importance_probes must be >= 1");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(d)) throw std::invalid_argument(s);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + std::string(key) + "': '" + s + "' is not a number");
  }
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + std::string(key) + "': '" + std::string(v) +
                      "' is not a non-negative integer");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + std::string(key) + "': '" + std::string(v) + "' is not a boolean");
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  while (!v.empty()) {
    const auto pos = v.find(',');
    const auto item = trim(v.substr(0, pos));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string_view::npos) break;
    v.remove_prefix(pos + 1);
  }
  return out;
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  auto& a = cfg.arch;
  if (key == "method") {
    auto m = parse_method(value);
    if (!m) throw ConfigError("unknown method '" + std::string(value) + "' (indiseek, factorizedcl, infodisen, clip)");
    cfg.method = *m;
  } else if (key == "lambda") {
    cfg.lambda = to_double(key, value);
  } else if (key == "lambda_grid") {
    cfg.lambda_grid.clear();
    if (value == "default") {
      cfg.lambda_grid = default_lambda_grid();
    } else if (value != "none" && !value.empty()) {
      for (auto item : split_list(value)) cfg.lambda_grid.push_back(to_double(key, item));
    }
  } else if (key == "tau") {
    cfg.tau = to_double(key, value);
  } else if (key == "epochs") {
    cfg.epochs = to_uint(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = to_uint(key, value);
  } else if (key == "lr") {
    cfg.lr = to_double(key, value);
  } else if (key == "posterior_lr") {
    cfg.posterior_lr = to_double(key, value);
  } else if (key == "posterior_steps") {
    cfg.posterior_steps = to_uint(key, value);
  } else if (key == "width") {
    a.width = to_uint(key, value);
  } else if (key == "layers") {
    a.layers = to_uint(key, value);
  } else if (key == "z_dim") {
    a.z_dim = to_uint(key, value);
  } else if (key == "shared_dim") {
    a.shared_dim = to_uint(key, value);
  } else if (key == "posterior_width") {
    a.posterior_width = to_uint(key, value);
  } else if (key == "posterior_layers") {
    a.posterior_layers = to_uint(key, value);
  } else if (key == "posterior_covariance") {
    if (value == "full") {
      a.posterior_covariance = Covariance::full;
    } else if (value == "diagonal") {
      a.posterior_covariance = Covariance::diagonal;
    } else {
      throw ConfigError("posterior_covariance must be 'full' or 'diagonal'");
    }
  } else if (key == "embed_dim") {
    a.embed_dim = to_uint(key, value);
  } else if (key == "embedder_layers") {
    a.embedder_layers = to_uint(key, value);
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (auto item : split_list(value)) cfg.seeds.push_back(to_uint(key, item));
  } else if (key == "seed_count") {
    const auto n = to_uint(key, value);
    cfg.seeds.clear();
    for (std::uint64_t s = 0; s < n; ++s) cfg.seeds.push_back(s);
  } else if (key == "stage1_skip") {
    cfg.stage1_skip = to_bool(key, value);
  } else if (key == "setting") {
    auto s = synth::parse_setting(value);
    if (!s) throw ConfigError("unknown setting '" + std::string(value) + "' (s1, s2, s3, s4)");
    cfg.setting = *s;
  } else if (key == "n_train") {
    cfg.n_train = to_uint(key, value);
  } else if (key == "n_test") {
    cfg.n_test = to_uint(key, value);
  } else if (key == "data") {
    cfg.data_path = std::string(value);
  } else if (key == "label_column") {
    cfg.label_column = std::string(value);
  } else if (key == "test_fraction") {
    cfg.test_fraction = to_double(key, value);
  } else if (key == "importance_probes") {
    cfg.importance_probes = to_uint(key, value);
  } else if (key == "importance_probe") {
    if (value == "uniform") {
      cfg.importance_probe = ImportanceProbe::uniform;
    } else if (value == "test_set") {
      cfg.importance_probe = ImportanceProbe::test_set;
    } else {
      throw ConfigError("importance_probe must be 'uniform' or 'test_set'");
    }
  } else if (key == "knn_k") {
    cfg.knn_k = to_uint(key, value);
  } else if (key == "run_id") {
    cfg.run_id = std::string(value);
  } else if (key == "output_root") {
    cfg.output_root = std::string(value);
  } else if (key == "jobs") {
    cfg.jobs = to_uint(key, value);
  } else if (key == "checkpoints") {
    cfg.write_checkpoints = to_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    try {
      apply_setting(base, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  auto list = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(v[i])>>) {
        s += fmt_double(v[i]);
      } else {
        s += std::to_string(v[i]);
      }
    }
    return s;
  };
  os << "method = " << to_string(cfg.method) << '\n'
     << "lambda = " << fmt_double(cfg.lambda) << '\n'
     << "lambda_grid = " << (cfg.lambda_grid.empty() ? "none" : list(cfg.lambda_grid)) << '\n'
     << "tau = " << fmt_double(cfg.tau) << '\n'
     << "epochs = " << cfg.epochs << '\n'
     << "batch_size = " << cfg.batch_size << '\n'
     << "lr = " << fmt_double(cfg.lr) << '\n'
     << "posterior_steps = " << cfg.posterior_steps << '\n'
     << "posterior_lr = " << fmt_double(cfg.posterior_lr) << '\n'
     << "width = " << cfg.arch.width << '\n'
     << "layers = " << cfg.arch.layers << '\n'
     << "z_dim = " << cfg.arch.z_dim << '\n'
     << "shared_dim = " << cfg.arch.shared_dim << '\n'
     << "posterior_width = " << cfg.arch.posterior_width << '\n'
     << "posterior_layers = " << cfg.arch.posterior_layers << '\n'
     << "posterior_covariance = " << (cfg.arch.posterior_covariance == Covariance::full ? "full" : "diagonal")
     << '\n'
     << "embed_dim = " << cfg.arch.embed_dim << '\n'
     << "embedder_layers = " << cfg.arch.embedder_layers << '\n'
     << "seeds = " << list(cfg.seeds) << '\n'
     << "stage1_skip = " << (cfg.stage1_skip ? "true" : "false") << '\n'
     << "setting = " << synth::to_string(cfg.setting) << '\n'
     << "n_train = " << cfg.n_train << '\n'
     << "n_test = " << cfg.n_test << '\n'
     << "data = " << cfg.data_path << '\n'
     << "label_column = " << cfg.label_column << '\n'
     << "test_fraction = " << fmt_double(cfg.test_fraction) << '\n'
     << "importance_probes = " << cfg.importance_probes << '\n'
     << "importance_probe = " << (cfg.importance_probe == ImportanceProbe::uniform ? "uniform" : "test_set")
     << '\n'
     << "knn_k = " << cfg.knn_k << '\n'
     << "checkpoints = " << (cfg.write_checkpoints ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace disentangle
