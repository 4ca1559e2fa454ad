#pragma once

#include <functional>
#include <vector>

#include "disentangle/matrix.hpp"
#include "disentangle/prng.hpp"

namespace disentangle::eval {

// Maps a batch of d-dim rows to a batch of p-dim rows.
using RepresentationMap = std::function<Matrix(const Matrix&)>;

struct ImportanceProfile {
  std::vector<double> zeta_hat;  // raw_zeta / |raw_zeta|_1
  std::vector<double> raw_zeta;
  std::size_t probes = 0;
};

inline constexpr double kProbeLow = -10.0;
inline constexpr double kProbeHigh = 10.0;
inline constexpr std::size_t kDefaultProbes = 1000;

// Masking importance over caller-supplied probes:
//   raw_zeta[j] = mean_i |psi(x_i) - psi(x_i with column j set to 0)|^2.
// Masking means zero fill; inputs are assumed centred.
// Throws DegenerateInputError when every raw_zeta entry is 0 (constant psi).
ImportanceProfile masking_importance(const RepresentationMap& psi, const Matrix& probes);

// Default form: M probes drawn i.i.d. uniform on [-10, 10]^d, shared across
// the d masked coordinates.
ImportanceProfile masking_importance(const RepresentationMap& psi, std::size_t d, std::size_t m,
                                     Prng& rng);

}  // namespace disentangle::eval
