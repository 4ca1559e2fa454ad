#include <cmath>
#include <set>

#include "doctest.h"
#include "disentangle/error.hpp"
#include "disentangle/matrix.hpp"
#include "disentangle/prng.hpp"
#include "support.hpp"

using namespace disentangle;
using testsupport::naive_matmul;

TEST_CASE("matmul small cases") {
  CHECK(matmul(Matrix{{1, 0}, {0, 1}}, Matrix{{3}, {4}}) == Matrix{{3}, {4}});
  CHECK(matmul(Matrix{{1, 2}}, Matrix{{3}, {4}}) == Matrix{{11}});
}

TEST_CASE("matmul matches the triple loop") {
  Prng rng(5);
  const Matrix a = gauss_sample(rng, 5, 7);
  const Matrix b = gauss_sample(rng, 7, 3);
  CHECK(max_abs_diff(matmul(a, b), naive_matmul(a, b)) < 1e-12);
  CHECK(max_abs_diff(matmul_tn(transpose(a), b), naive_matmul(a, b)) < 1e-12);
  CHECK(max_abs_diff(matmul_nt(a, transpose(b)), naive_matmul(a, b)) < 1e-12);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL("expected InvariantError");
  } catch (const InvariantError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
  }
}

TEST_CASE("matmul is associative") {
  Prng rng(9);
  for (int t = 0; t < 10; ++t) {
    const Matrix a = gauss_sample(rng, 4, 6), b = gauss_sample(rng, 6, 5), c = gauss_sample(rng, 5, 3);
    const Matrix l = matmul(matmul(a, b), c), r = matmul(a, matmul(b, c));
    CHECK(max_abs_diff(l, r) < 1e-9 * std::max(1.0, max_abs(l)));
  }
}

TEST_CASE("elementwise ops") {
  CHECK(elementwise(UnaryOp::relu, Matrix{{-1, 0, 2}}) == Matrix{{0, 0, 2}});
  CHECK(elementwise(UnaryOp::cube, Matrix{{2, -1}}) == Matrix{{8, -1}});
  CHECK(elementwise(UnaryOp::relu_grad, Matrix{{-1, 0, 2}}) == Matrix{{0, 0, 1}});
  Prng rng(1);
  const Matrix x = gauss_sample(rng, 10, 10);
  const Matrix s = elementwise(UnaryOp::sin, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(s.values()[i] - std::sin(x.values()[i])) <= 1e-15);
  CHECK(elementwise(BinaryOp::mul, Matrix{{1, 2}}, Matrix{{3, 4}}) == Matrix{{3, 8}});
  CHECK_THROWS_AS(elementwise(BinaryOp::add, Matrix(1, 2), Matrix(2, 1)), InvariantError);
}

TEST_CASE("gauss_sample moments and determinism") {
  Prng a(42), b(42);
  const Matrix x = gauss_sample(a, 10000, 1);
  CHECK(x == gauss_sample(b, 10000, 1));
  CHECK(std::abs(testsupport::column_mean(x, 0)) < 0.04);
  CHECK(std::abs(testsupport::column_var(x, 0) - 1.0) < 0.05);
  Prng c(42);
  const Matrix y = gauss_sample(c, 10000, 2);
  CHECK(std::abs(testsupport::correlation(y, 0, y, 1)) < 0.04);
}

TEST_CASE("uniform_sample range and errors") {
  Prng rng(3);
  const Matrix u = uniform_sample(rng, 10000, 1, -10, 10);
  CHECK(std::abs(testsupport::column_mean(u, 0)) < 0.2);
  const Matrix v = uniform_sample(rng, 1000, 3, 0, 1);
  for (double x : v.values()) CHECK((x >= 0.0 && x < 1.0));
  CHECK_THROWS_AS(uniform_sample(rng, 1, 1, 1, 1), ArgumentError);
  CHECK_THROWS_AS(uniform_sample(rng, 1, 1, 2, 1), ArgumentError);
  Prng p(8), q(8);
  CHECK(uniform_sample(p, 10, 10, -1, 1) == uniform_sample(q, 10, 10, -1, 1));
}

namespace {

// Chi-squared statistic over 20 equiprobable bins given a CDF.
double chi_squared(const Matrix& x, const std::function<double(double)>& cdf) {
  std::vector<double> counts(20, 0.0);
  for (double v : x.values()) {
    const auto bin = std::min<std::size_t>(19, static_cast<std::size_t>(cdf(v) * 20.0));
    counts[bin] += 1.0;
  }
  const double expected = static_cast<double>(x.size()) / 20.0;
  double chi = 0.0;
  for (double c : counts) chi += (c - expected) * (c - expected) / expected;
  return chi;
}

}  // namespace

TEST_CASE("samplers pass chi-squared goodness of fit") {
  // 19 degrees of freedom, significance 0.001.
  const double critical = 43.82;
  Prng rng(2024);
  const Matrix g = gauss_sample(rng, 100000, 1);
  CHECK(chi_squared(g, [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); }) < critical);
  const Matrix u = uniform_sample(rng, 100000, 1, -10, 10);
  CHECK(chi_squared(u, [](double v) { return (v + 10.0) / 20.0; }) < critical);
}

TEST_CASE("prng streams are distinct and reproducible") {
  Prng root(11);
  Prng s0 = root.stream(0), s1 = root.stream(1), s0b = root.stream(0);
  CHECK(s0 == s0b);
  CHECK_FALSE(s0 == s1);
  CHECK(s0.next_u64() != s1.next_u64());
  Prng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("below is in range and roughly uniform") {
  Prng rng(4);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("permutation and derangement") {
  Prng rng(6);
  const auto p = permutation(rng, 50);
  CHECK(std::set<std::size_t>(p.begin(), p.end()).size() == 50);
  for (int t = 0; t < 20; ++t) {
    const auto d = derangement(rng, 2 + t);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] != i);
    CHECK(std::set<std::size_t>(d.begin(), d.end()).size() == d.size());
  }
  CHECK_THROWS_AS(derangement(rng, 1), ArgumentError);
}

TEST_CASE("matrix helpers") {
  const Matrix a{{1, 2}, {3, 4}};
  CHECK(hconcat(a, Matrix{{5}, {6}}) == Matrix{{1, 2, 5}, {3, 4, 6}});
  CHECK(col_block(Matrix{{1, 2, 5}, {3, 4, 6}}, 1, 2) == Matrix{{2, 5}, {4, 6}});
  const std::vector<std::size_t> idx{1, 0, 1};
  CHECK(gather_rows(a, idx) == Matrix{{3, 4}, {1, 2}, {3, 4}});
  CHECK(column_sums(a) == Matrix{{4, 6}});
  CHECK(transpose(a) == Matrix{{1, 3}, {2, 4}});
  CHECK(frobenius_sq(a) == 30.0);
  CHECK(total_variance(a) == doctest::Approx(4.0));
  Matrix b = a;
  add_row_broadcast(b, Matrix{{1, 1}});
  CHECK(b == Matrix{{2, 3}, {4, 5}});
  axpy(b, -1.0, a);
  CHECK(b == Matrix{{1, 1}, {1, 1}});
  CHECK(all_finite(a));
  CHECK_FALSE(all_finite(Matrix{{std::nan("")}}));
}
