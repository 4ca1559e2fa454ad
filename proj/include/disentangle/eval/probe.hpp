#pragma once

#include <vector>

#include "disentangle/matrix.hpp"
#include "disentangle/prng.hpp"

namespace disentangle::eval {

inline constexpr double kProbeL2 = 1e-4;
inline constexpr double kProbeGradTol = 1e-6;
inline constexpr std::size_t kProbeMaxIter = 10000;

struct ProbeResult {
  double accuracy = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t classes = 0;
};

// Multinomial logistic regression on train-standardised features, fitted by
// full-batch gradient descent on mean cross-entropy + (kProbeL2 / 2)|W|^2
// (bias unpenalised) until the gradient norm drops below kProbeGradTol or
// kProbeMaxIter steps. The step size is 1 / L with L a Lipschitz bound of the
// objective's gradient. Labels are class ids 0..K-1. Throws ArgumentError
// when fewer than two classes appear in the training labels.
ProbeResult linear_probe(const Matrix& train_x, const std::vector<int>& train_y, const Matrix& test_x,
                         const std::vector<int>& test_y);

// Shuffles rows with rng and holds out test_fraction of them.
ProbeResult linear_probe(const Matrix& features, const std::vector<int>& labels, double test_fraction,
                         Prng& rng);

}  // namespace disentangle::eval
