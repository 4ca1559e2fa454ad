#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "disentangle/matrix.hpp"
#include "disentangle/mlp.hpp"
#include "disentangle/prng.hpp"

namespace testsupport {

using disentangle::Gradients;
using disentangle::Matrix;
using disentangle::MlpNet;
using disentangle::Prng;

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

inline double rel_err(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

struct FdReport {
  std::size_t checked = 0;
  double worst = 0.0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  void record(double analytic, double numeric) {
    const double e = rel_err(analytic, numeric);
    if (e > worst) {
      worst = e;
      worst_analytic = analytic;
      worst_numeric = numeric;
    }
    ++checked;
  }
};

// Central differences on `count` random parameters of `net`. `loss` must
// evaluate the scalar with the net's current parameters.
inline FdReport fd_check_params(MlpNet& net, const Gradients& analytic, const std::function<double()>& loss,
                                std::size_t count, Prng& rng, double h = 1e-5) {
  FdReport r;
  const std::size_t layers = net.layer_count();
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t k = rng.below(layers);
    const bool bias = rng.below(4) == 0;
    Matrix& p = bias ? net.mutable_biases()[k] : net.mutable_weights()[k];
    const std::size_t i = rng.below(p.size());
    const double orig = p.values()[i];
    p.values()[i] = orig + h;
    const double up = loss();
    (bias ? net.mutable_biases()[k] : net.mutable_weights()[k]).values()[i] = orig - h;
    const double down = loss();
    (bias ? net.mutable_biases()[k] : net.mutable_weights()[k]).values()[i] = orig;
    const double numeric = (up - down) / (2 * h);
    const double a = (bias ? analytic.biases[k] : analytic.weights[k]).values()[i];
    r.record(a, numeric);
  }
  return r;
}

// Central differences on every entry of a matrix input.
inline FdReport fd_check_matrix(Matrix& m, const Matrix& analytic, const std::function<double()>& loss,
                                double h = 1e-5) {
  FdReport r;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double orig = m.values()[i];
    m.values()[i] = orig + h;
    const double up = loss();
    m.values()[i] = orig - h;
    const double down = loss();
    m.values()[i] = orig;
    r.record(analytic.values()[i], (up - down) / (2 * h));
  }
  return r;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double column_mean(const Matrix& m, std::size_t c) {
  double s = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, c);
  return s / static_cast<double>(m.rows());
}

inline double column_var(const Matrix& m, std::size_t c) {
  const double mu = column_mean(m, c);
  double s = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) s += (m(r, c) - mu) * (m(r, c) - mu);
  return s / static_cast<double>(m.rows() - 1);
}

inline double correlation(const Matrix& a, std::size_t ca, const Matrix& b, std::size_t cb) {
  const double ma = column_mean(a, ca), mb = column_mean(b, cb);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double da = a(r, ca) - ma, db = b(r, cb) - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace testsupport
