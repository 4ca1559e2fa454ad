#pragma once

#include <cstdint>
#include <vector>

#include "disentangle/matrix.hpp"
#include "disentangle/mlp.hpp"

namespace disentangle {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment buffers for one MlpNet. Shapes mirror the network's parameters.
struct AdamState {
  AdamConfig config;
  std::uint64_t step_count = 0;
  std::vector<Matrix> m_weights, v_weights, m_biases, v_biases;

  AdamState() = default;
  AdamState(const MlpNet& net, AdamConfig cfg = {});
};

// One bias-corrected Adam update:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   theta <- theta - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
void adam_step(MlpNet& net, const Gradients& grads, AdamState& state);

}  // namespace disentangle
