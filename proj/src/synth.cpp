#include "disentangle/synth.hpp"

#include <array>
#include <cmath>

#include "disentangle/error.hpp"

namespace disentangle::synth {

namespace {

const std::array<double, 6> kDiscreteSupport = {-std::sqrt(7.0) / 2.0, -1.0, -0.5, 0.5, 1.0,
                                                std::sqrt(7.0) / 2.0};

double discrete_draw(Prng& rng) { return kDiscreteSupport[rng.below(kDiscreteSupport.size())]; }

}  // namespace

std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::s1:
      return "s1";
    case Setting::s2:
      return "s2";
    case Setting::s3:
      return "s3";
    case Setting::s4:
      return "s4";
  }
  return "?";
}

std::optional<Setting> parse_setting(std::string_view name) {
  if (name == "s1" || name == "S1" || name == "1") return Setting::s1;
  if (name == "s2" || name == "S2" || name == "2") return Setting::s2;
  if (name == "s3" || name == "S3" || name == "3") return Setting::s3;
  if (name == "s4" || name == "S4" || name == "4") return Setting::s4;
  return std::nullopt;
}

std::vector<std::size_t> ideal_specific_coords(Setting s) {
  if (s == Setting::s1 || s == Setting::s3) return {2, 3, 4, 5};
  return {4, 5};
}

Matrix smooth_shared_map(const Matrix& x) {
  if (x.cols() < kSharedDim) throw InvariantError("smooth_shared_map: need at least 2 columns");
  const Matrix u = col_block(x, 0, kSharedDim);
  Matrix c = scale(u, 0.5);
  axpy(c, 0.2, elementwise(UnaryOp::sin, u));
  axpy(c, 0.2, elementwise(UnaryOp::cube, u));
  return c;
}

Matrix oracle_shared(Setting s, const Matrix& x) {
  if (s == Setting::s1 || s == Setting::s3) return smooth_shared_map(x);
  return col_block(x, 0, kSharedDim);
}

SynthBatch generate(const SynthConfig& cfg, Prng& rng) {
  if (cfg.n == 0) throw ArgumentError("synth::generate: n must be >= 1");
  SynthBatch b;
  b.x1 = Matrix(cfg.n, kInputDim);
  Matrix& x = b.x1;
  switch (cfg.setting) {
    case Setting::s1:
      x = gauss_sample(rng, cfg.n, kInputDim);
      break;
    case Setting::s3:
      for (std::size_t i = 0; i < cfg.n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        for (std::size_t j = 2; j < kInputDim; ++j) x(i, j) = discrete_draw(rng);
      }
      break;
    case Setting::s2:
    case Setting::s4:
      for (std::size_t i = 0; i < cfg.n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        x(i, 2) = 0.2 * (x(i, 0) + x(i, 1));
        x(i, 3) = x(i, 0) * x(i, 1);
        if (cfg.setting == Setting::s2) {
          x(i, 4) = rng.normal();
          x(i, 5) = rng.normal();
        } else {
          x(i, 4) = discrete_draw(rng);
          x(i, 5) = discrete_draw(rng);
        }
      }
      break;
  }
  b.c1 = oracle_shared(cfg.setting, x);
  b.ideal_specific_coords = ideal_specific_coords(cfg.setting);
  return b;
}

SynthBatch generate(const SynthConfig& cfg) {
  Prng rng(cfg.seed);
  return generate(cfg, rng);
}

}  // namespace disentangle::synth
