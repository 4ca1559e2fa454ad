#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace disentangle {

// Row-major dense matrix of doubles. Rows are samples, columns are features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  std::string shape_string() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class UnaryOp { relu, relu_grad, sin, cos, cube, square, exp, log };
enum class BinaryOp { add, sub, mul };

// Matrix product a*b. Throws InvariantError on a.cols != b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without materialising the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T without materialising the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix identity(std::size_t n);

// relu_grad is the 0/1 indicator of x > 0. exp and log follow std:: semantics
// and may return non-finite values for out-of-domain input.
Matrix elementwise(UnaryOp op, const Matrix& a);
Matrix elementwise(BinaryOp op, const Matrix& a, const Matrix& b);

Matrix scale(const Matrix& a, double s);
// a += s * b
void axpy(Matrix& a, double s, const Matrix& b);
// Adds a 1 x cols row vector to every row.
void add_row_broadcast(Matrix& a, const Matrix& row);
// 1 x cols column sums.
Matrix column_sums(const Matrix& a);

Matrix hconcat(const Matrix& a, const Matrix& b);
// Columns [first, first + count).
Matrix col_block(const Matrix& a, std::size_t first, std::size_t count);
Matrix gather_rows(const Matrix& a, std::span<const std::size_t> idx);

double frobenius_sq(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& a);

// Unbiased per-column sample variance, summed over columns.
double total_variance(const Matrix& a);

}  // namespace disentangle
