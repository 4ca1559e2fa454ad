#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disentangle/matrix.hpp"
#include "disentangle/prng.hpp"

namespace disentangle::synth {

inline constexpr std::size_t kInputDim = 6;
inline constexpr std::size_t kSharedDim = 2;

// S1: x ~ N(0, I_6), c = f(x_{1:2}) with f(u) = 0.5u + 0.2 sin u + 0.2 u^3.
// S2: x_{1,2,5,6} ~ N(0, 1), x_3 = 0.2 (x_1 + x_2), x_4 = x_1 x_2, c = x_{1:2}.
// S3: S1 with x_{3:6} drawn from the discrete uniform on
//     {-sqrt(7)/2, -1, -1/2, 1/2, 1, sqrt(7)/2} (mean 0, variance 1).
// S4: S2 with x_{5,6} drawn from that discrete uniform.
enum class Setting { s1, s2, s3, s4 };

std::string_view to_string(Setting s);
std::optional<Setting> parse_setting(std::string_view name);

struct SynthConfig {
  Setting setting = Setting::s1;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
};

struct SynthBatch {
  Matrix x1;  // n x 6
  Matrix c1;  // n x 2, oracle shared features
  // Zero-based columns of x1 that an ideal modality-specific map uses:
  // {2,3,4,5} for S1/S3 and {4,5} for S2/S4.
  std::vector<std::size_t> ideal_specific_coords;
};

std::vector<std::size_t> ideal_specific_coords(Setting s);

// 0.5 u + 0.2 sin(u) + 0.2 u^3 applied to the first two columns of x.
Matrix smooth_shared_map(const Matrix& x);
// The oracle shared map for a setting applied to rows of x.
Matrix oracle_shared(Setting s, const Matrix& x);

SynthBatch generate(const SynthConfig& cfg, Prng& rng);
// Uses Prng(cfg.seed).
SynthBatch generate(const SynthConfig& cfg);

}  // namespace disentangle::synth
