#include "disentangle/mlp.hpp"

#include <atomic>
#include <cmath>
#include <cstring>

#include "disentangle/error.hpp"

namespace disentangle {

namespace {

std::uint64_t fresh_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

void relu_inplace(Matrix& m) {
  for (double& x : m.values()) x = x > 0.0 ? x : 0.0;
}

}  // namespace

MlpNet::MlpNet(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)), id_(fresh_id()) {
  if (dims_.size() < 2) throw ArgumentError("MlpNet: need at least input and output dims");
  for (std::size_t d : dims_) {
    if (d == 0) throw ArgumentError("MlpNet: layer dims must be >= 1");
  }
  for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
    weights_.emplace_back(dims_[k], dims_[k + 1]);
    biases_.emplace_back(1, dims_[k + 1]);
  }
}

MlpNet::MlpNet(const MlpNet& other)
    : dims_(other.dims_),
      weights_(other.weights_),
      biases_(other.biases_),
      id_(fresh_id()),
      version_(0) {}

MlpNet& MlpNet::operator=(const MlpNet& other) {
  if (this != &other) {
    dims_ = other.dims_;
    weights_ = other.weights_;
    biases_ = other.biases_;
    id_ = fresh_id();
    version_ = 0;
  }
  return *this;
}

std::size_t MlpNet::parameter_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t k = 0; k < weights_.size(); ++k) n += weights_[k].size() + biases_[k].size();
  return n;
}

std::vector<Matrix>& MlpNet::mutable_weights() noexcept {
  ++version_;
  return weights_;
}

std::vector<Matrix>& MlpNet::mutable_biases() noexcept {
  ++version_;
  return biases_;
}

Gradients Gradients::zeros_like(const MlpNet& net) {
  Gradients g;
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    g.weights.emplace_back(net.weights()[k].rows(), net.weights()[k].cols());
    g.biases.emplace_back(1, net.biases()[k].cols());
  }
  return g;
}

void Gradients::accumulate(const Gradients& other, double s) {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    axpy(weights[k], s, other.weights[k]);
    axpy(biases[k], s, other.biases[k]);
  }
  if (!input.empty() && !other.input.empty()) axpy(input, s, other.input);
}

ForwardResult forward(const MlpNet& net, const Matrix& x) {
  if (x.cols() != net.input_dim()) {
    throw InvariantError("forward: input " + x.shape_string() + " but network expects " +
                         std::to_string(net.input_dim()) + " columns");
  }
  ForwardResult res;
  res.tape.net_id = net.id();
  res.tape.net_version = net.version();
  res.tape.inputs.reserve(net.layer_count());
  res.tape.pre.reserve(net.layer_count());
  Matrix act = x;
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    Matrix pre = matmul(act, net.weights()[k]);
    add_row_broadcast(pre, net.biases()[k]);
    res.tape.inputs.push_back(std::move(act));
    if (k + 1 < net.layer_count()) {
      act = pre;
      relu_inplace(act);
      res.tape.pre.push_back(std::move(pre));
    } else {
      res.output = pre;
      res.tape.pre.push_back(std::move(pre));
    }
  }
  return res;
}

Matrix predict(const MlpNet& net, const Matrix& x) {
  if (x.cols() != net.input_dim()) {
    throw InvariantError("predict: input " + x.shape_string() + " but network expects " +
                         std::to_string(net.input_dim()) + " columns");
  }
  Matrix act = x;
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    Matrix pre = matmul(act, net.weights()[k]);
    add_row_broadcast(pre, net.biases()[k]);
    if (k + 1 < net.layer_count()) relu_inplace(pre);
    act = std::move(pre);
  }
  return act;
}

Gradients backward(const MlpNet& net, Tape& tape, const Matrix& grad_out) {
  if (tape.consumed) throw ContractError("backward: tape already consumed");
  if (tape.net_id != net.id() || tape.net_version != net.version()) {
    throw ContractError("backward: tape was recorded for a different network state");
  }
  if (tape.pre.size() != net.layer_count()) throw ContractError("backward: incomplete tape");
  const Matrix& out = tape.pre.back();
  if (grad_out.rows() != out.rows() || grad_out.cols() != out.cols()) {
    throw InvariantError("backward: grad_out " + grad_out.shape_string() + " does not match output " +
                         out.shape_string());
  }
  tape.consumed = true;

  Gradients g;
  g.weights.resize(net.layer_count());
  g.biases.resize(net.layer_count());
  Matrix delta = grad_out;
  for (std::size_t k = net.layer_count(); k-- > 0;) {
    g.weights[k] = matmul_tn(tape.inputs[k], delta);
    g.biases[k] = column_sums(delta);
    Matrix prev = matmul_nt(delta, net.weights()[k]);
    if (k > 0) {
      const Matrix& pre = tape.pre[k - 1];
      auto pv = prev.values();
      auto zv = pre.values();
      for (std::size_t i = 0; i < pv.size(); ++i) {
        if (!(zv[i] > 0.0)) pv[i] = 0.0;
      }
    }
    delta = std::move(prev);
  }
  g.input = std::move(delta);
  return g;
}

MlpNet init_net(Prng& rng, std::vector<std::size_t> layer_dims) {
  MlpNet net(std::move(layer_dims));
  auto& w = net.mutable_weights();
  for (auto& m : w) {
    const double sd = std::sqrt(2.0 / static_cast<double>(m.rows()));
    for (double& x : m.values()) x = sd * rng.normal();
  }
  return net;
}

std::vector<std::size_t> mlp_dims(std::size_t in, std::size_t width, std::size_t layers, std::size_t out) {
  if (layers == 0) throw ArgumentError("mlp_dims: need at least one layer");
  std::vector<std::size_t> dims{in};
  for (std::size_t i = 0; i + 1 < layers; ++i) dims.push_back(width);
  dims.push_back(out);
  return dims;
}

std::uint64_t parameter_checksum(const MlpNet& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const Matrix& m) {
    for (double x : m.values()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &x, sizeof(double));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  };
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    mix(net.weights()[k]);
    mix(net.biases()[k]);
  }
  return h;
}

}  // namespace disentangle
