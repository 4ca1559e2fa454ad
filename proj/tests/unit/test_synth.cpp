#include <cmath>
#include <set>

#include "doctest.h"
#include "disentangle/synth.hpp"
#include "support.hpp"

using namespace disentangle;
using namespace disentangle::synth;

TEST_CASE("setting names") {
  CHECK(parse_setting("s1") == Setting::s1);
  CHECK(parse_setting("S4") == Setting::s4);
  CHECK_FALSE(parse_setting("s9").has_value());
  CHECK(to_string(Setting::s3) == "s3");
}

TEST_CASE("S1 shared map hand evaluation") {
  const Matrix x{{1, -1, 0, 0, 0, 0}};
  const Matrix c = oracle_shared(Setting::s1, x);
  const double v = 0.5 + 0.2 * std::sin(1.0) + 0.2;
  CHECK(c(0, 0) == doctest::Approx(v).epsilon(1e-15));
  CHECK(c(0, 1) == doctest::Approx(-v).epsilon(1e-15));
  CHECK(c(0, 0) == doctest::Approx(0.8683).epsilon(1e-4));
}

TEST_CASE("S1 batch shapes and determinism") {
  const auto a = generate({Setting::s1, 500, 3});
  const auto b = generate({Setting::s1, 500, 3});
  CHECK(a.x1.rows() == 500);
  CHECK(a.x1.cols() == 6);
  CHECK(a.c1.cols() == 2);
  CHECK(a.x1 == b.x1);
  CHECK(a.c1 == b.c1);
  CHECK(a.c1 == smooth_shared_map(a.x1));
  CHECK(a.ideal_specific_coords == std::vector<std::size_t>{2, 3, 4, 5});
  CHECK_FALSE(generate({Setting::s1, 500, 4}).x1 == a.x1);
}

TEST_CASE("S2 dependent coordinates") {
  const auto b = generate({Setting::s2, 10000, 1});
  Matrix sum(b.x1.rows(), 1);
  for (std::size_t r = 0; r < b.x1.rows(); ++r) sum(r, 0) = b.x1(r, 0) + b.x1(r, 1);
  CHECK(std::abs(testsupport::correlation(b.x1, 2, sum, 0) - 1.0) < 1e-12);
  CHECK(std::abs(testsupport::column_mean(b.x1, 3)) < 0.04);
  for (std::size_t r = 0; r < 100; ++r) CHECK(b.x1(r, 3) == b.x1(r, 0) * b.x1(r, 1));
  CHECK(b.c1 == col_block(b.x1, 0, 2));
  CHECK(b.ideal_specific_coords == std::vector<std::size_t>{4, 5});
  for (std::size_t i : {0, 1}) {
    for (std::size_t j : {4, 5}) CHECK(std::abs(testsupport::correlation(b.x1, i, b.x1, j)) < 0.04);
  }
}

TEST_CASE("discrete settings draw from the six-point support") {
  const double h = std::sqrt(7.0) / 2.0;
  const std::set<double> support{-h, -1.0, -0.5, 0.5, 1.0, h};
  const auto s3 = generate({Setting::s3, 6000, 2});
  for (std::size_t r = 0; r < s3.x1.rows(); ++r) {
    for (std::size_t j = 2; j < 6; ++j) CHECK(support.count(s3.x1(r, j)) == 1);
  }
  for (std::size_t j = 2; j < 6; ++j) {
    CHECK(std::abs(testsupport::column_mean(s3.x1, j)) < 0.05);
    CHECK(std::abs(testsupport::column_var(s3.x1, j) - 1.0) < 0.06);
  }
  const auto s4 = generate({Setting::s4, 2000, 2});
  for (std::size_t r = 0; r < s4.x1.rows(); ++r) {
    CHECK(support.count(s4.x1(r, 4)) == 1);
    CHECK(s4.x1(r, 3) == s4.x1(r, 0) * s4.x1(r, 1));
  }
  CHECK(s4.c1 == col_block(s4.x1, 0, 2));
}
