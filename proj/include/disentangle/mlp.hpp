#pragma once

#include <cstdint>
#include <vector>

#include "disentangle/matrix.hpp"
#include "disentangle/prng.hpp"

namespace disentangle {

// Fully connected ReLU network with a linear output layer.
//
// layer_dims = [d_in, w_1, ..., w_{L-1}, d_out] gives L weight matrices, so a
// "five-layer" network has five weight matrices: four hidden ReLU layers plus
// the linear output. weights[k] is (layer_dims[k] x layer_dims[k+1]) and
// biases[k] is a 1 x layer_dims[k+1] row.
class MlpNet {
 public:
  MlpNet() = default;
  explicit MlpNet(std::vector<std::size_t> layer_dims);
  MlpNet(const MlpNet& other);
  MlpNet& operator=(const MlpNet& other);
  MlpNet(MlpNet&&) noexcept = default;
  MlpNet& operator=(MlpNet&&) noexcept = default;

  const std::vector<std::size_t>& layer_dims() const noexcept { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  std::size_t layer_count() const noexcept { return weights_.size(); }
  std::size_t parameter_count() const noexcept;

  const std::vector<Matrix>& weights() const noexcept { return weights_; }
  const std::vector<Matrix>& biases() const noexcept { return biases_; }
  // Mutable access invalidates every outstanding Tape.
  std::vector<Matrix>& mutable_weights() noexcept;
  std::vector<Matrix>& mutable_biases() noexcept;

  std::uint64_t id() const noexcept { return id_; }
  std::uint64_t version() const noexcept { return version_; }
  void touch() noexcept { ++version_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<Matrix> weights_;
  std::vector<Matrix> biases_;
  std::uint64_t id_ = 0;
  std::uint64_t version_ = 0;
};

// Activations cached by forward(). Only valid for the network state that
// produced it and consumed by exactly one call to backward().
struct Tape {
  std::uint64_t net_id = 0;
  std::uint64_t net_version = 0;
  bool consumed = false;
  // inputs[k] is the input to layer k; pre[k] its pre-activation.
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre;
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;
  Matrix input;

  static Gradients zeros_like(const MlpNet& net);
  void accumulate(const Gradients& other, double s = 1.0);
};

struct ForwardResult {
  Matrix output;
  Tape tape;
};

ForwardResult forward(const MlpNet& net, const Matrix& x);
// Forward pass without caching, for evaluation.
Matrix predict(const MlpNet& net, const Matrix& x);

// Gradients of <grad_out, net(x)> with respect to weights, biases and input.
// Throws ContractError when the tape is consumed or belongs to another
// network state.
Gradients backward(const MlpNet& net, Tape& tape, const Matrix& grad_out);

// He initialisation: W ~ N(0, 2 / fan_in), zero biases.
MlpNet init_net(Prng& rng, std::vector<std::size_t> layer_dims);

// [in, width x (layers - 1), out]
std::vector<std::size_t> mlp_dims(std::size_t in, std::size_t width, std::size_t layers, std::size_t out);

// Order-sensitive FNV-1a digest over the raw parameter bytes.
std::uint64_t parameter_checksum(const MlpNet& net);

}  // namespace disentangle
