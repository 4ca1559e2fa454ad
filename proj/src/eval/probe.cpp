#include "disentangle/eval/probe.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "disentangle/error.hpp"

namespace disentangle::eval {

namespace {

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_sd;

  explicit Standardizer(const Matrix& x) : mean(x.cols(), 0.0), inv_sd(x.cols(), 1.0) {
    const auto n = static_cast<double>(x.rows());
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) s += x(r, c);
      mean[c] = s / n;
      double ss = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) ss += (x(r, c) - mean[c]) * (x(r, c) - mean[c]);
      const double sd = std::sqrt(ss / n);
      if (sd > 0.0) inv_sd[c] = 1.0 / sd;
    }
  }

  // Standardised features with a trailing constant column for the bias.
  Matrix apply(const Matrix& x) const {
    Matrix out(x.rows(), x.cols() + 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mean[c]) * inv_sd[c];
      out(r, x.cols()) = 1.0;
    }
    return out;
  }
};

double top_eigenvalue_gram(const Matrix& x) {
  // Power iteration on x^T x / n.
  Matrix v(x.cols(), 1, 1.0 / std::sqrt(static_cast<double>(x.cols())));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Matrix w = matmul_tn(x, matmul(x, v));
    const double norm = std::sqrt(frobenius_sq(w));
    if (norm == 0.0) return 0.0;
    const double next = norm / static_cast<double>(x.rows());
    v = scale(w, 1.0 / norm);
    if (std::abs(next - lambda) <= 1e-10 * next) return next;
    lambda = next;
  }
  return lambda;
}

void softmax_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (double& v : row) v /= z;
  }
}

}  // namespace

ProbeResult linear_probe(const Matrix& train_x, const std::vector<int>& train_y, const Matrix& test_x,
                         const std::vector<int>& test_y) {
  if (train_x.rows() != train_y.size() || test_x.rows() != test_y.size()) {
    throw InvariantError("linear_probe: feature and label counts differ");
  }
  if (train_x.cols() != test_x.cols()) throw InvariantError("linear_probe: train/test feature dims differ");
  if (test_x.rows() == 0) throw ArgumentError("linear_probe: empty test split");
  for (int y : train_y) {
    if (y < 0) throw ArgumentError("linear_probe: labels must be non-negative class ids");
  }
  const std::set<int> present(train_y.begin(), train_y.end());
  if (present.size() < 2) throw ArgumentError("linear_probe: training split needs at least two classes");
  int max_label = *present.rbegin();
  for (int y : test_y) max_label = std::max(max_label, y);
  const auto k = static_cast<std::size_t>(max_label) + 1;

  const Standardizer st(train_x);
  const Matrix xs = st.apply(train_x);
  const std::size_t n = xs.rows();
  const std::size_t dim = xs.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double lipschitz = 0.5 * top_eigenvalue_gram(xs) + kProbeL2;
  const double step = 1.0 / (1.01 * lipschitz);

  Matrix w(dim, k);
  ProbeResult res;
  res.classes = present.size();
  for (std::size_t it = 0; it < kProbeMaxIter; ++it) {
    Matrix p = matmul(xs, w);
    softmax_rows(p);
    for (std::size_t r = 0; r < n; ++r) p(r, static_cast<std::size_t>(train_y[r])) -= 1.0;
    Matrix grad = scale(matmul_tn(xs, p), inv_n);
    for (std::size_t r = 0; r + 1 < dim; ++r)
      for (std::size_t c = 0; c < k; ++c) grad(r, c) += kProbeL2 * w(r, c);
    res.iterations = it + 1;
    if (std::sqrt(frobenius_sq(grad)) < kProbeGradTol) {
      res.converged = true;
      break;
    }
    axpy(w, -step, grad);
  }

  const Matrix logits = matmul(st.apply(test_x), w);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    const auto pred = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    correct += pred == test_y[r];
  }
  res.accuracy = static_cast<double>(correct) / static_cast<double>(logits.rows());
  return res;
}

ProbeResult linear_probe(const Matrix& features, const std::vector<int>& labels, double test_fraction,
                         Prng& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("linear_probe: test fraction must lie in (0, 1)");
  }
  if (features.rows() != labels.size()) throw InvariantError("linear_probe: feature and label counts differ");
  const auto perm = permutation(rng, features.rows());
  const auto n_test = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(features.rows()))));
  if (n_test >= features.rows()) throw ArgumentError("linear_probe: split leaves no training rows");
  const std::span<const std::size_t> test_idx(perm.data(), n_test);
  const std::span<const std::size_t> train_idx(perm.data() + n_test, perm.size() - n_test);
  std::vector<int> ytr, yte;
  for (std::size_t i : train_idx) ytr.push_back(labels[i]);
  for (std::size_t i : test_idx) yte.push_back(labels[i]);
  return linear_probe(gather_rows(features, train_idx), ytr, gather_rows(features, test_idx), yte);
}

}  // namespace disentangle::eval
