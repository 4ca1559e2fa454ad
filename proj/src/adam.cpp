#include "disentangle/adam.hpp"

#include <cmath>

#include "disentangle/error.hpp"

namespace disentangle {

AdamState::AdamState(const MlpNet& net, AdamConfig cfg) : config(cfg) {
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    const auto& w = net.weights()[k];
    const auto& b = net.biases()[k];
    m_weights.emplace_back(w.rows(), w.cols());
    v_weights.emplace_back(w.rows(), w.cols());
    m_biases.emplace_back(b.rows(), b.cols());
    v_biases.emplace_back(b.rows(), b.cols());
  }
}

namespace {

void update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, const AdamConfig& cfg,
            double bc1, double bc2) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols() || m.size() != param.size()) {
    throw InvariantError("adam_step: gradient " + grad.shape_string() + " does not match parameter " +
                         param.shape_string());
  }
  auto p = param.values();
  auto g = grad.values();
  auto mv = m.values();
  auto vv = v.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    mv[i] = cfg.beta1 * mv[i] + (1.0 - cfg.beta1) * g[i];
    vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mhat = mv[i] / bc1;
    const double vhat = vv[i] / bc2;
    p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

}  // namespace

void adam_step(MlpNet& net, const Gradients& grads, AdamState& state) {
  if (grads.weights.size() != net.layer_count() || state.m_weights.size() != net.layer_count()) {
    throw InvariantError("adam_step: layer count mismatch");
  }
  state.step_count += 1;
  const auto t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.config.beta1, t);
  const double bc2 = 1.0 - std::pow(state.config.beta2, t);
  auto& w = net.mutable_weights();
  auto& b = net.mutable_biases();
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    update(w[k], grads.weights[k], state.m_weights[k], state.v_weights[k], state.config, bc1, bc2);
    update(b[k], grads.biases[k], state.m_biases[k], state.v_biases[k], state.config, bc1, bc2);
  }
}

}  // namespace disentangle
