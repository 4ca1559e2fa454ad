#include "disentangle/matrix.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "disentangle/error.hpp"

namespace disentangle {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMajor>;
using View = Eigen::Map<RowMajor>;

ConstView view(const Matrix& m) {
  return ConstView(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}
View view(Matrix& m) {
  return View(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvariantError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InvariantError("Matrix: buffer of length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvariantError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

std::string Matrix::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw InvariantError("matmul: cannot multiply " + a.shape_string() + " by " + b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  if (a.cols() == 0) return out;
  view(out).noalias() = view(a) * view(b);
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw InvariantError("matmul_tn: cannot multiply transpose of " + a.shape_string() + " by " +
                         b.shape_string());
  }
  Matrix out(a.cols(), b.cols());
  if (a.rows() == 0) return out;
  view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw InvariantError("matmul_nt: cannot multiply " + a.shape_string() + " by transpose of " +
                         b.shape_string());
  }
  Matrix out(a.rows(), b.rows());
  if (a.cols() == 0) return out;
  view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

Matrix identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Matrix elementwise(UnaryOp op, const Matrix& a) {
  Matrix out = a;
  auto v = out.values();
  switch (op) {
    case UnaryOp::relu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case UnaryOp::relu_grad:
      for (double& x : v) x = x > 0.0 ? 1.0 : 0.0;
      break;
    case UnaryOp::sin:
      for (double& x : v) x = std::sin(x);
      break;
    case UnaryOp::cos:
      for (double& x : v) x = std::cos(x);
      break;
    case UnaryOp::cube:
      for (double& x : v) x = x * x * x;
      break;
    case UnaryOp::square:
      for (double& x : v) x = x * x;
      break;
    case UnaryOp::exp:
      for (double& x : v) x = std::exp(x);
      break;
    case UnaryOp::log:
      for (double& x : v) x = std::log(x);
      break;
  }
  return out;
}

Matrix elementwise(BinaryOp op, const Matrix& a, const Matrix& b) {
  require_same_shape("elementwise", a, b);
  Matrix out = a;
  auto v = out.values();
  auto w = b.values();
  switch (op) {
    case BinaryOp::add:
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
      break;
    case BinaryOp::sub:
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= w[i];
      break;
    case BinaryOp::mul:
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= w[i];
      break;
  }
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& x : out.values()) x *= s;
  return out;
}

void axpy(Matrix& a, double s, const Matrix& b) {
  require_same_shape("axpy", a, b);
  auto v = a.values();
  auto w = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * w[i];
}

void add_row_broadcast(Matrix& a, const Matrix& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw InvariantError("add_row_broadcast: row " + row.shape_string() + " does not fit " +
                         a.shape_string());
  }
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) dst[c] += row(0, c);
  }
}

Matrix column_sums(const Matrix& a) {
  Matrix out(1, a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto src = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) out(0, c) += src[c];
  }
  return out;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw InvariantError("hconcat: row mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(a.row(r).begin(), a.row(r).end(), dst.begin());
    std::copy(b.row(r).begin(), b.row(r).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

Matrix col_block(const Matrix& a, std::size_t first, std::size_t count) {
  if (first + count > a.cols()) {
    throw InvariantError("col_block: columns [" + std::to_string(first) + ", " +
                         std::to_string(first + count) + ") out of range for " + a.shape_string());
  }
  Matrix out(a.rows(), count);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto src = a.row(r);
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(first),
              src.begin() + static_cast<std::ptrdiff_t>(first + count), out.row(r).begin());
  }
  return out;
}

Matrix gather_rows(const Matrix& a, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), a.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= a.rows()) {
      throw InvariantError("gather_rows: index " + std::to_string(idx[i]) + " out of range for " +
                           a.shape_string());
    }
    auto src = a.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

double frobenius_sq(const Matrix& a) {
  double s = 0.0;
  for (double x : a.values()) s += x * x;
  return s;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.values()) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape("max_abs_diff", a, b);
  double m = 0.0;
  auto v = a.values();
  auto w = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i] - w[i]));
  return m;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.values().begin(), a.values().end(), [](double x) { return std::isfinite(x); });
}

double total_variance(const Matrix& a) {
  if (a.rows() < 2) return 0.0;
  const Matrix sums = column_sums(a);
  double total = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    const double mean = sums(0, c) / static_cast<double>(a.rows());
    double ss = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const double d = a(r, c) - mean;
      ss += d * d;
    }
    total += ss / static_cast<double>(a.rows() - 1);
  }
  return total;
}

}  // namespace disentangle
